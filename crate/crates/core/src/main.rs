fn main() {
    std::process::exit(kerr_loss::experiments::run_cli(std::env::args_os()));
}
