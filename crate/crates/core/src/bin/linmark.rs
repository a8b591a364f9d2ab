fn main() {
    std::process::exit(linmark::cli::main_with_args(std::env::args_os()));
}
