fn main() {
    std::process::exit(mcplasso::cli::run(std::env::args_os()));
}
