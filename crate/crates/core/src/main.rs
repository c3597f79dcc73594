fn main() {
    std::process::exit(bnlog::cli::run(std::env::args_os()));
}
