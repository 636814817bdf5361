fn main() {
    std::process::exit(ffmedian::cli::main());
}
