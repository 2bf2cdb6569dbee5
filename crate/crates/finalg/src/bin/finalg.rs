fn main() {
    std::process::exit(finalg::cli::main());
}
