fn main() {
    std::process::exit(kdcontext::cli::run(std::env::args_os()));
}
