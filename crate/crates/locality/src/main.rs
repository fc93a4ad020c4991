fn main() {
    std::process::exit(locality::cli::run(std::env::args_os()));
}
