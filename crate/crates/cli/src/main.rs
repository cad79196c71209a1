fn main() {
    std::process::exit(l1exact_cli::main_with_args(std::env::args_os()));
}
