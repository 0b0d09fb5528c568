fn main() {
    std::process::exit(dirac2b::cli::run(std::env::args_os()));
}
