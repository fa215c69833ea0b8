fn main() {
    std::process::exit(mahler_lab::run(std::env::args()));
}
