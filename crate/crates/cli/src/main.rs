use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = revbound_cli::run_cli(std::env::args_os());
    let text = outcome.output.as_bytes();
    if outcome.code >= revbound_cli::EXIT_USAGE {
        let _ = std::io::stderr().write_all(text);
    } else {
        let _ = std::io::stdout().write_all(text);
    }
    ExitCode::from(outcome.code as u8)
}
