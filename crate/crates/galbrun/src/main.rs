fn main() {
    std::process::exit(galbrun::cli::run(std::env::args_os()));
}
