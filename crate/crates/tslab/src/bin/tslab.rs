fn main() {
    std::process::exit(tslab::cli::main());
}
