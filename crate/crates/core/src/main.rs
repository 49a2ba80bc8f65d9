fn main() {
    std::process::exit(neutral_stab::cli::run(std::env::args_os()));
}
