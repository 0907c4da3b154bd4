fn main() {
    std::process::exit(bethe_pt::cli::run(std::env::args_os()));
}
