fn main() {
    std::process::exit(breather_cli::run_from(std::env::args_os()));
}
