fn main() {
    std::process::exit(sqzhd_cli::run(std::env::args_os()));
}
