fn main() {
    std::process::exit(rfpa_isac::cli::main());
}
