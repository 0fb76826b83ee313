fn main() {
    std::process::exit(fraisse::cli::main_with_args(std::env::args_os()));
}
