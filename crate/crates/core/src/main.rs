fn main() {
    std::process::exit(f2b_core::cli::run(std::env::args_os()));
}
