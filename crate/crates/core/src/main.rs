fn main() {
    std::process::exit(postlab::cli::run());
}
