fn main() {
    std::process::exit(genalpha::cli::run(std::env::args_os()));
}
