fn main() {
    std::process::exit(khovanov::cli::run());
}
