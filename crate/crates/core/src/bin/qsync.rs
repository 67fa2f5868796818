fn main() {
    std::process::exit(qsync::cli::main_with_std());
}
