use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::init();
    griffiths_cli::main_with(std::env::args_os())
}
