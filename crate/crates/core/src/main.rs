use std::process::ExitCode;

fn main() -> ExitCode {
    quadform_games::cli::main_with(std::env::args_os())
}
