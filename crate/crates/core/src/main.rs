fn main() {
    std::process::exit(ctms::cli::run(std::env::args_os()));
}
