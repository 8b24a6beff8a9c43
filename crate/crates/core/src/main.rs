fn main() {
    std::process::exit(loopfactor::cli::main_with_args(std::env::args_os()));
}
