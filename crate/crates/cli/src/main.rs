fn main() {
    std::process::exit(overlapq_cli::main_with_env());
}
