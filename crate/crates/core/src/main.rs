fn main() {
    std::process::exit(conflab::run());
}
