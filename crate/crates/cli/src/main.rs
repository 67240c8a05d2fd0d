fn main() {
    std::process::exit(alphamatch_cli::run(std::env::args_os()));
}
