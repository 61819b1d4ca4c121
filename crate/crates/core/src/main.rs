fn main() {
    std::process::exit(cavgate::cli::run_from_args());
}
