fn main() {
    std::process::exit(covthresh::cli::main_with_args(std::env::args_os()));
}
