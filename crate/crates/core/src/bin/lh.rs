fn main() -> std::process::ExitCode {
    lambda_h::cli::main_with(std::env::args_os())
}
