//! Flat `key=value` text used for parameter files, manifests and configs.
//!
//! Blank lines and lines starting with `#` are ignored; keys are unique.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvFile {
    entries: Vec<(String, String)>,
}

impl KvFile {
    pub fn new() -> Self {
        KvFile::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::validation(format!("missing key `{key}`")))
    }

    pub fn parse_f64(&self, key: &str) -> Result<f64> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::validation(format!("key `{key}`: `{raw}` is not a number")))
    }

    pub fn parse_u64(&self, key: &str) -> Result<u64> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::validation(format!("key `{key}`: `{raw}` is not an integer")))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = KvFile::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, line, "expected key=value"))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(i + 1, line, "empty key"));
            }
            if out.get(k).is_some() {
                return Err(Error::parse(i + 1, k, "duplicate key"));
            }
            out.entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    /// Render with an optional leading comment line.
    pub fn render(&self, comment: Option<&str>) -> String {
        let mut s = String::new();
        if let Some(c) = comment {
            let _ = writeln!(s, "# {c}");
        }
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let mut kv = KvFile::new();
        kv.set("a", 1.5);
        kv.set("b", "x");
        kv.set("a", 2);
        let text = kv.render(Some("hdr"));
        assert_eq!(text, "# hdr\na=2\nb=x\n");
        assert_eq!(KvFile::parse(&text).unwrap(), kv);
        assert!(KvFile::parse("a=1\na=2\n").is_err());
        assert!(KvFile::parse("novalue\n").is_err());
    }
}
