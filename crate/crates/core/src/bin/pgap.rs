fn main() {
    std::process::exit(perspective_gap::cli::run(std::env::args_os()));
}
