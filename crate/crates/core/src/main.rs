fn main() {
    std::process::exit(plural_market::cli::run(std::env::args_os()));
}
