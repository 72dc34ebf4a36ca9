fn main() {
    std::process::exit(gridnash::cli::run(std::env::args_os()));
}
