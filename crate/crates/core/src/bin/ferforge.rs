fn main() {
    std::process::exit(ferforge::cli::main_with_args(std::env::args_os()));
}
