fn main() {
    std::process::exit(timing_inference::cli::main_with_args(std::env::args_os()));
}
