fn main() {
    std::process::exit(cohwit::cli::run(std::env::args_os()));
}
