fn main() {
    std::process::exit(privamp::cli::run());
}
