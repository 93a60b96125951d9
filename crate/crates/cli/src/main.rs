fn main() {
    std::process::exit(epitrace_cli::app::main_with(std::env::args_os()));
}
