fn main() {
    std::process::exit(cmoment::cli::run(std::env::args_os()));
}
