fn main() {
    std::process::exit(robust_extraction::cli::run(std::env::args_os()));
}
