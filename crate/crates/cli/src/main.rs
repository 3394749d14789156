fn main() {
    std::process::exit(rebound_cli::run(std::env::args_os()));
}
