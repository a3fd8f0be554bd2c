fn main() {
    std::process::exit(nilsolve::cli::run(std::env::args_os()));
}
