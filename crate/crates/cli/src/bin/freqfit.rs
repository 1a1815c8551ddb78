fn main() {
    std::process::exit(freqfit_cli::run_command(std::env::args_os()));
}
