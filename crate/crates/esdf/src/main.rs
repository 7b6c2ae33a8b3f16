fn main() {
    std::process::exit(esdf::cli::run(std::env::args_os()));
}
