fn main() {
    std::process::exit(choice_predict::cli::main_entry());
}
