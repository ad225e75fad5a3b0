fn main() {
    std::process::exit(shubinlab::cli::run_from_args(std::env::args_os()));
}
