fn main() {
    std::process::exit(sfk::cli::run(std::env::args_os()));
}
