fn main() {
    std::process::exit(thresnet::cli::main_with_args(std::env::args_os()));
}
