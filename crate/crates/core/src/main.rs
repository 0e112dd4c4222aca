fn main() {
    std::process::exit(lyc::cli::run(std::env::args_os()));
}
