fn main() {
    std::process::exit(lexshift::cli::main_with_args(std::env::args_os()));
}
