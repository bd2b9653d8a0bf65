fn main() {
    std::process::exit(pbsp_cli::run(std::env::args_os()));
}
