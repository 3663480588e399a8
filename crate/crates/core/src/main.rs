fn main() {
    std::process::exit(anycurve::cli::run(std::env::args_os()));
}
