fn main() {
    std::process::exit(hardyk::cli::run());
}
