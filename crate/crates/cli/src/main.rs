use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, text) = weyl_cli::run(std::env::args_os());
    if code == weyl_cli::EXIT_USAGE || code == weyl_cli::EXIT_INVALID_SIGNATURE {
        eprint!("{text}");
    } else {
        print!("{text}");
        let _ = std::io::stdout().flush();
    }
    ExitCode::from(code as u8)
}
