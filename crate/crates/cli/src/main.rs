mod args;
mod commands;
mod doc;
mod input;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] balanced_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    /// An embedding audit failed; the document is still written.
    #[error("guarantee violated: {0}")]
    Guarantee(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(_) | CliError::Io { .. } | CliError::Input(_) => 2,
            CliError::Guarantee(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Greedy(a) => commands::greedy(a),
        Command::Balance(a) => commands::balance(a),
        Command::Embed(a) => commands::embed(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Boundary(a) => commands::boundary(a),
    };
    let (mut document, failure) = match result {
        Ok(outcome) if outcome.stdout_taken && cli.out.is_none() => (None, outcome.failure),
        Ok(outcome) => (Some(outcome.document), outcome.failure),
        Err(e) => (None, Some(e)),
    };
    if let Some(doc) = document.as_mut() {
        if cli.no_timing {
            doc.timing.clear();
        }
        for w in &doc.warnings {
            eprintln!("warning: {w}");
        }
        let text = doc.render();
        let written = match &cli.out {
            Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            }),
            None => {
                print!("{text}");
                Ok(())
            }
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
