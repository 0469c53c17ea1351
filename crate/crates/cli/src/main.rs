mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use trajsim_core::Error;

use args::{Cli, Command};

/// Failure of a command, classified by exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub fn usage<T>(msg: impl Into<String>) -> CmdResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Usage(_) | Failure::Core(Error::Argument(_)) => 2,
        Failure::Core(Error::Numeric { .. }) => 4,
        Failure::Core(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Gt(a) => commands::gt(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Bench(a) => commands::bench(a),
        Command::Analyze(a) => commands::analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Core(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
