fn main() {
    std::process::exit(gridstrength::cli::run(std::env::args_os()));
}
