use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let exec = kratzer_dirac::cli::execute(std::env::args_os());
    let _ = std::io::stdout().write_all(exec.stdout.as_bytes());
    let _ = std::io::stderr().write_all(exec.stderr.as_bytes());
    ExitCode::from(exec.code)
}
