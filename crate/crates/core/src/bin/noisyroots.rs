fn main() {
    std::process::exit(noisyroots::cli::main_with_args(std::env::args_os()));
}
