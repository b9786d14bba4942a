fn main() {
    std::process::exit(expochar::cli::run(std::env::args_os()));
}
