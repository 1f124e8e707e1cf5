fn main() {
    std::process::exit(qchain::cli::run(std::env::args()));
}
