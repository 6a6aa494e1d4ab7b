fn main() {
    std::process::exit(semimarkov::cli::main_with_args(std::env::args_os()));
}
