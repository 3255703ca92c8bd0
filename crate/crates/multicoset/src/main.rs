fn main() {
    std::process::exit(multicoset::cli::run());
}
