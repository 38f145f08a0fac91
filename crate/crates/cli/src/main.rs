fn main() {
    std::process::exit(spinmix_cli::run(std::env::args_os()));
}
