fn main() {
    std::process::exit(relext::cli::run(std::env::args_os()));
}
