fn main() {
    std::process::exit(irig::harness::cli::run(std::env::args_os()));
}
