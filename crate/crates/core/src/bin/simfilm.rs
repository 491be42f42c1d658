fn main() {
    std::process::exit(simfilm::cli::main_with_args(std::env::args_os()));
}
