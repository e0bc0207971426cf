fn main() {
    std::process::exit(tilescope::cli::run(std::env::args_os()));
}
