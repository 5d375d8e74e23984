fn main() {
    std::process::exit(qpea_cli::run(std::env::args_os()));
}
