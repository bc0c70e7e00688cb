fn main() {
    std::process::exit(edgelab::harness::cli::cli_main(std::env::args_os()));
}
