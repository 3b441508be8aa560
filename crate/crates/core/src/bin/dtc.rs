fn main() {
    std::process::exit(dtc_sim::cli::main_with_args(std::env::args_os()));
}
