fn main() {
    std::process::exit(periodic_telegraph::cli::run());
}
