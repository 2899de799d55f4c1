fn main() {
    std::process::exit(mestim::cli::main_with_args(std::env::args_os()));
}
