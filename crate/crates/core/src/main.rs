fn main() {
    std::process::exit(charpar::cli::run(std::env::args_os()));
}
