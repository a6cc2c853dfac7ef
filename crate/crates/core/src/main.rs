fn main() {
    std::process::exit(hormander::harness::cli::run(std::env::args_os()));
}
