fn main() {
    std::process::exit(countbmc::cli::run(std::env::args_os()));
}
