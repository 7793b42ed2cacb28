use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input data that parsed but failed a domain check.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The model cannot handle this kind of input (e.g. ambiguity in strict mode).
    #[error("unsupported input for {model}: {reason}")]
    Unsupported { model: &'static str, reason: String },

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("schema mismatch: model expects `{expected}`, matrix has `{found}`")]
    Schema { expected: String, found: String },

    #[error("ENO undefined: mse {mse} is not above the curve floor {floor}")]
    EnoUndefined { mse: f64, floor: f64 },

    #[error("problem `{id}`: {source}")]
    Problem {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("generator exceeded {0} restarts")]
    RestartCap(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    /// Attach a problem id to an error raised while processing that problem.
    pub fn in_problem(self, id: &str) -> Self {
        Error::Problem {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
