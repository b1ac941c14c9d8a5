fn main() {
    std::process::exit(projsym::cli::run());
}
