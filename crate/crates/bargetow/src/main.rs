fn main() {
    std::process::exit(bargetow::cli::run(std::env::args_os()));
}
