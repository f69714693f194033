use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use prismatic_cli::{exit_code, render, run_corpus, run_source, trailer, Emit};

#[derive(Parser)]
#[command(name = "prismatic", version, about = "Run verification tasks on .prism problem files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem file, or every file of a corpus directory.
    Run {
        #[arg(required_unless_present = "corpus", conflicts_with = "corpus")]
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        emit: Emit,
        /// Seed for the randomized property suites.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        corpus: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        file,
        emit,
        seed,
        corpus,
    } = cli.command;
    let start = Instant::now();
    let outcomes = match (file, corpus) {
        (_, Some(dir)) => match run_corpus(&dir, seed) {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: {}: {e}", dir.display());
                return ExitCode::from(2);
            }
        },
        (Some(path), None) => match std::fs::read_to_string(&path) {
            Ok(text) => vec![(String::new(), run_source(&text, seed))],
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        (None, None) => unreachable!("clap requires a file or --corpus"),
    };
    print!("{}", render(&outcomes, emit));
    let t = trailer(start.elapsed());
    match emit {
        Emit::Text => println!("{t}"),
        Emit::Structured => eprintln!("{t}"),
    }
    ExitCode::from(exit_code(&outcomes) as u8)
}
