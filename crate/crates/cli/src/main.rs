fn main() {
    std::process::exit(vibrafin_cli::run(std::env::args_os()));
}
