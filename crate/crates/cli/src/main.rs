fn main() {
    std::process::exit(rpw_cli::run(std::env::args_os()));
}
