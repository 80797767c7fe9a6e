fn main() {
    std::process::exit(henon_morse::cli::main_with_args(std::env::args_os()));
}
