fn main() {
    std::process::exit(engel_cli::run(std::env::args_os().skip(1)));
}
