fn main() {
    std::process::exit(phosphene::cli::run(std::env::args_os()));
}
