fn main() {
    std::process::exit(nlpl_cli::main_with_args(std::env::args_os()));
}
