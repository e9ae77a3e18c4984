fn main() {
    std::process::exit(backscatter::cli::cli_main(std::env::args_os()));
}
