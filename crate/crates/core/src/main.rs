fn main() {
    std::process::exit(isoflow::cli::main_with_args(std::env::args_os()));
}
