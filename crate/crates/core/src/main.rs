fn main() {
    std::process::exit(qpp::cli::run(std::env::args_os()));
}
