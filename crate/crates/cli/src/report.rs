//! Report assembly and the two output formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use prismatic::cech::Verdict;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Heading(String),
    Entry(String, String),
    Warning(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub task: String,
    pub verdict: Verdict,
    pub items: Vec<Item>,
}

impl Section {
    pub fn new(task: &str) -> Self {
        Section {
            task: task.to_string(),
            verdict: Verdict::Pass,
            items: Vec::new(),
        }
    }

    pub fn heading(&mut self, h: impl Into<String>) {
        self.items.push(Item::Heading(h.into()));
    }

    pub fn entry(&mut self, k: impl Into<String>, v: impl ToString) {
        self.items.push(Item::Entry(k.into(), v.to_string()));
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.items.push(Item::Warning(w.into()));
    }

    /// Records a check; a failure makes the section fail.
    pub fn require(&mut self, k: impl Into<String>, ok: bool) {
        self.entry(k, if ok { "yes" } else { "no" });
        if !ok {
            self.verdict = Verdict::Fail;
        }
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.entry("error", reason.into());
        self.verdict = Verdict::Fail;
    }

    /// Downgrades the verdict without upgrading a failure.
    pub fn merge(&mut self, v: Verdict) {
        self.verdict = match (self.verdict, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::ArtifactAtTopWeight, _) | (_, Verdict::ArtifactAtTopWeight) => {
                Verdict::ArtifactAtTopWeight
            }
            _ => Verdict::Pass,
        };
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub sections: Vec<Section>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| s.verdict != Verdict::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for sec in &self.sections {
            writeln!(s, "[{}] {}", sec.task, sec.verdict).unwrap();
            for it in &sec.items {
                match it {
                    Item::Heading(h) => writeln!(s, "  {h}:").unwrap(),
                    Item::Entry(k, v) => writeln!(s, "    {k} = {v}").unwrap(),
                    Item::Warning(w) => writeln!(s, "  warning: {w}").unwrap(),
                }
            }
        }
        s
    }

    pub fn structured(&self) -> StructuredReport {
        StructuredReport {
            passed: self.passed(),
            sections: self
                .sections
                .iter()
                .map(|sec| {
                    let mut groups: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
                    let mut warnings = Vec::new();
                    let mut current = "summary".to_string();
                    for it in &sec.items {
                        match it {
                            Item::Heading(h) => current = h.clone(),
                            Item::Entry(k, v) => {
                                groups.entry(current.clone()).or_default().insert(k.clone(), v.clone());
                            }
                            Item::Warning(w) => warnings.push(w.clone()),
                        }
                    }
                    StructuredSection {
                        task: sec.task.clone(),
                        verdict: sec.verdict.to_string(),
                        groups,
                        warnings,
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuredSection {
    pub task: String,
    pub verdict: String,
    pub groups: BTreeMap<String, BTreeMap<String, String>>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuredReport {
    pub passed: bool,
    pub sections: Vec<StructuredSection>,
}

/// The timing trailer; always the last line of text output.
pub fn trailer(elapsed: std::time::Duration) -> String {
    format!("# elapsed {:.3} s", elapsed.as_secs_f64())
}

/// Drops a trailing timing line, for comparing outputs.
pub fn strip_trailer(out: &str) -> &str {
    match out.trim_end_matches('\n').rfind('\n') {
        Some(i) if out[i + 1..].starts_with("# elapsed") => &out[..i + 1],
        None if out.starts_with("# elapsed") => "",
        _ => out,
    }
}
