fn main() {
    std::process::exit(fraclib::cli::run());
}
