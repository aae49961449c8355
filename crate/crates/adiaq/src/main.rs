use std::process::ExitCode;

fn main() -> ExitCode {
    adiaq::cli::run()
}
