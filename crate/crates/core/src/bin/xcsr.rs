fn main() {
    std::process::exit(xcsr::cli::main_with_args(std::env::args_os()));
}
