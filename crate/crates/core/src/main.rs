fn main() -> std::process::ExitCode {
    parawave::cli::main_with(std::env::args_os())
}
