fn main() {
    std::process::exit(w2clt::cli::main());
}
