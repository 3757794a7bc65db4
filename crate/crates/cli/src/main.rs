fn main() {
    std::process::exit(qwalk_cli::run_cli(std::env::args_os()));
}
