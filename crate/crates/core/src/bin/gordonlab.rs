fn main() {
    std::process::exit(gordonlab::cli::run(std::env::args()));
}
