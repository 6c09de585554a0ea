fn main() {
    std::process::exit(ulstyle::cli::main_with_args(std::env::args_os()));
}
