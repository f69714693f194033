//! Batch front end: parse `.prism` problem files, run the requested tasks
//! and render deterministic reports.

pub mod report;
pub mod run;
pub mod spec;

use std::path::Path;

use serde::Serialize;

pub use report::{strip_trailer, trailer, Report};
pub use run::run;
pub use spec::{parse, ParseError, ProblemSpec, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Emit {
    Text,
    Structured,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Ran(Report),
    InputError(ParseError),
}

impl Outcome {
    /// 0 pass, 1 verification failure, 2 input error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Ran(r) => r.exit_code(),
            Outcome::InputError(_) => 2,
        }
    }
}

pub fn run_source(input: &str, seed: u64) -> Outcome {
    match parse(input) {
        Ok(spec) => Outcome::Ran(run(&spec, seed)),
        Err(e) => Outcome::InputError(e),
    }
}

/// Runs every `*.prism` file of `dir` in file name order.
pub fn run_corpus(dir: &Path, seed: u64) -> std::io::Result<Vec<(String, Outcome)>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "prism"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)?;
            let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Ok((name, run_source(&text, seed)))
        })
        .collect()
}

#[derive(Serialize)]
struct StructuredFile {
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<report::StructuredReport>,
}

/// Renders outcomes without the timing trailer. A single unnamed outcome is
/// rendered bare.
pub fn render(outcomes: &[(String, Outcome)], emit: Emit) -> String {
    match emit {
        Emit::Text => {
            let mut s = String::new();
            let bare = outcomes.len() == 1 && outcomes[0].0.is_empty();
            for (name, o) in outcomes {
                if !bare {
                    s.push_str(&format!("=== {name} ===\n"));
                }
                match o {
                    Outcome::Ran(r) => s.push_str(&r.text()),
                    Outcome::InputError(e) => s.push_str(&format!("input error: {e}\n")),
                }
            }
            s
        }
        Emit::Structured => {
            let files: Vec<StructuredFile> = outcomes
                .iter()
                .map(|(name, o)| StructuredFile {
                    file: name.clone(),
                    input_error: match o {
                        Outcome::InputError(e) => Some(e.to_string()),
                        Outcome::Ran(_) => None,
                    },
                    report: match o {
                        Outcome::Ran(r) => Some(r.structured()),
                        Outcome::InputError(_) => None,
                    },
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&files).expect("serializable");
            s.push('\n');
            s
        }
    }
}

/// The worst exit code among outcomes.
pub fn exit_code(outcomes: &[(String, Outcome)]) -> i32 {
    outcomes.iter().map(|(_, o)| o.exit_code()).max().unwrap_or(0)
}
