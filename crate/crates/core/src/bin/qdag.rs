fn main() {
    std::process::exit(qdag::cli::run(std::env::args_os()));
}
