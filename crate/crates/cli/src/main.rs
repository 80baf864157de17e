use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hyperset_cli::run(std::env::args_os()))
}
