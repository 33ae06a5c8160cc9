fn main() {
    std::process::exit(thetawave::cli::run(std::env::args_os()));
}
