fn main() {
    std::process::exit(fsi_split::cli::run_cli(std::env::args_os()));
}
