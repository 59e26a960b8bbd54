fn main() {
    std::process::exit(nanotalbot::cli::run(std::env::args_os()));
}
