use std::process::ExitCode;

fn main() -> ExitCode {
    skyhand_cli::run(std::env::args_os())
}
