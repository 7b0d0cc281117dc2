use std::io;
use std::process::ExitCode;

use clap::Parser;
use hyperboxing::cli::{execute, Cli};

fn main() -> ExitCode {
    // clap exits with status 2 on bad flags
    let cli = Cli::parse();
    let code = execute(&cli, &mut io::stdin().lock(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
