fn main() {
    std::process::exit(nc::cli::run(std::env::args_os()));
}
