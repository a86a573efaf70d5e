use std::process::ExitCode;

fn main() -> ExitCode {
    dilemma_cli::main_with(std::env::args_os())
}
