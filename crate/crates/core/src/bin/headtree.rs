fn main() {
    std::process::exit(headtree::cli::main());
}
