fn main() {
    std::process::exit(pacetrack_cli::main_with(std::env::args_os()));
}
