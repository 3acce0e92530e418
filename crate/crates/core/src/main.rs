fn main() {
    std::process::exit(padic_heyde::cli::run(std::env::args_os()));
}
