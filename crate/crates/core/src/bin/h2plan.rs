fn main() {
    std::process::exit(h2plan::cli::run(std::env::args_os()));
}
