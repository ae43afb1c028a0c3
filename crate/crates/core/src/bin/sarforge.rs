fn main() {
    std::process::exit(sarforge::cli::main_with_args(std::env::args_os()));
}
