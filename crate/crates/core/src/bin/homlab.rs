fn main() {
    std::process::exit(homlab::cli::main_with(std::env::args_os()));
}
