mod args;
mod commands;
mod output;

use clap::Parser;

use mtail::Error;

pub use args::Cli;
use args::Command;
use commands::Outcome;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        Error::Domain(_)
        | Error::InvalidParams(_)
        | Error::InvalidModel(_)
        | Error::UnsupportedModel(_)
        | Error::Unavailable(_) => EXIT_DOMAIN,
        Error::Io(_) | Error::Parse(_) => EXIT_IO,
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Bound(a) => commands::bound(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Regress(a) => commands::regress(a),
        Command::Selfnorm(a) => commands::selfnorm(a),
    };
    match result {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::Violation) => {
            eprintln!("mtail: assertion suite reported violations");
            EXIT_VIOLATION
        }
        Err(e) => {
            eprintln!("mtail: {e}");
            exit_code(&e)
        }
    }
}
