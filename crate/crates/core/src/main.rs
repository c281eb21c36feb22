fn main() {
    std::process::exit(kslab::cli::run(std::env::args_os()));
}
