fn main() {
    std::process::exit(hyperdyn_cli::run(std::env::args_os()));
}
