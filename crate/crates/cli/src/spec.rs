//! The line-oriented problem format.
//!
//! ```text
//! prism p=5 N=1 mode=crystalline
//! ring T cap 3
//! higgs rank=1
//! theta 1 [1,1] = T
//! caps W=5 imax=2 jmax=1 nilbound=64
//! task dr
//! ```
//!
//! `#` starts a comment. θ indices, rows and columns are 1-based.

use std::fmt;
use std::sync::Arc;

use prismatic::algebra::{FreeModuleMap, GeneratorSpec, TruncatedAlgebra};
use prismatic::coefficients::{is_prime, Modulus};
use prismatic::corpus::{PrismMode, RingSpec, ThetaEntry, ALL_TASKS, Q_GENERATOR};
use prismatic::higgs::DEFAULT_NIL_BOUND;
use prismatic::poly::parse_element;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Check,
    Stratify,
    Cocycle,
    Dr,
    CaCompare,
    Duality,
    BaseChange,
}

impl Task {
    pub fn name(self) -> &'static str {
        ALL_TASKS[self as usize]
    }

    fn from_name(s: &str) -> Option<Task> {
        use Task::*;
        [Check, Stratify, Cocycle, Dr, CaCompare, Duality, BaseChange]
            .into_iter()
            .find(|t| t.name() == s)
    }

    /// Does the task need the stratification (and hence `W`)?
    pub fn needs_weight(self) -> bool {
        matches!(self, Task::Stratify | Task::Cocycle | Task::CaCompare)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub w: Option<u32>,
    pub i_max: u32,
    pub j_max: u32,
    pub nil_bound: u32,
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub ring: RingSpec,
    pub rank: usize,
    pub entries: Vec<ThetaEntry>,
    pub caps: Caps,
    pub tasks: Vec<Task>,
    pub algebra: Arc<TruncatedAlgebra>,
    pub thetas: Vec<FreeModuleMap>,
}

impl ProblemSpec {
    pub fn n(&self) -> usize {
        self.ring.n()
    }
}

#[derive(Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn err<T>(&self, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.no,
            column: col,
            message: message.into(),
        })
    }

    fn tokens(&self) -> Vec<Tok<'a>> {
        let mut out = Vec::new();
        let mut start = None;
        for (ci, (bi, ch)) in self.text.char_indices().enumerate() {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some((ci, bi)),
                (true, Some((c0, b0))) => {
                    out.push(Tok { text: &self.text[b0..bi], col: c0 + 1 });
                    start = None;
                }
                _ => {}
            }
        }
        if let Some((c0, b0)) = start {
            out.push(Tok { text: &self.text[b0..], col: c0 + 1 });
        }
        out
    }

    fn int<T: std::str::FromStr>(&self, t: Tok, what: &str) -> Result<T, ParseError> {
        t.text
            .parse()
            .or_else(|_| self.err(t.col, format!("expected an integer for {what}, found '{}'", t.text)))
    }

    /// `key=value` pairs, each key at most once and from `allowed`.
    fn pairs(&self, toks: &[Tok<'a>], allowed: &[&str]) -> Result<Vec<(&'a str, Tok<'a>)>, ParseError> {
        let mut out: Vec<(&str, Tok)> = Vec::new();
        for t in toks {
            let Some((k, v)) = t.text.split_once('=') else {
                return self.err(t.col, format!("expected key=value, found '{}'", t.text));
            };
            if !allowed.contains(&k) {
                return self.err(t.col, format!("unknown key '{k}'"));
            }
            if out.iter().any(|(k2, _)| *k2 == k) {
                return self.err(t.col, format!("key '{k}' given twice"));
            }
            out.push((
                k,
                Tok {
                    text: v,
                    col: t.col + k.chars().count() + 1,
                },
            ));
        }
        Ok(out)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && it.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct RawTheta<'a> {
    line: usize,
    idx: [(usize, usize); 3],
    poly: &'a str,
    poly_col: usize,
}

/// Parses `theta <i> [<row>,<col>] = <poly>` after the keyword.
fn parse_theta<'a>(line: &Line<'a>, rest_col: usize) -> Result<RawTheta<'a>, ParseError> {
    let chars: Vec<(usize, char)> = line.text.char_indices().collect();
    let mut pos = rest_col - 1;
    let skip = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].1.is_whitespace() {
            *pos += 1;
        }
    };
    let number = |pos: &mut usize, what: &str| -> Result<(usize, usize), ParseError> {
        skip(pos);
        let start = *pos;
        while *pos < chars.len() && chars[*pos].1.is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return line.err(start + 1, format!("expected {what}"));
        }
        let b0 = chars[start].0;
        let b1 = chars.get(*pos).map(|c| c.0).unwrap_or(line.text.len());
        match line.text[b0..b1].parse() {
            Ok(v) => Ok((v, start + 1)),
            Err(_) => line.err(start + 1, format!("{what} is too large")),
        }
    };
    let punct = |pos: &mut usize, c: char| -> Result<(), ParseError> {
        skip(pos);
        if chars.get(*pos).map(|x| x.1) == Some(c) {
            *pos += 1;
            Ok(())
        } else {
            line.err(*pos + 1, format!("expected '{c}'"))
        }
    };
    let i = number(&mut pos, "a theta index")?;
    punct(&mut pos, '[')?;
    let row = number(&mut pos, "a row")?;
    punct(&mut pos, ',')?;
    let col = number(&mut pos, "a column")?;
    punct(&mut pos, ']')?;
    punct(&mut pos, '=')?;
    let b = chars.get(pos).map(|c| c.0).unwrap_or(line.text.len());
    Ok(RawTheta {
        line: line.no,
        idx: [i, row, col],
        poly: &line.text[b..],
        poly_col: pos + 1,
    })
}

/// Parses and validates a problem description.
pub fn parse(input: &str) -> Result<ProblemSpec, ParseError> {
    let mut prism: Option<(usize, PrismMode, u64, u32, usize)> = None;
    let mut gens: Vec<GeneratorSpec> = Vec::new();
    let mut gen_lines: Vec<(usize, usize)> = Vec::new();
    let mut rank: Option<(usize, usize)> = None;
    let mut raw_thetas: Vec<RawTheta> = Vec::new();
    let mut caps_line: Option<usize> = None;
    let mut caps = Caps {
        w: None,
        i_max: 0,
        j_max: 0,
        nil_bound: DEFAULT_NIL_BOUND,
    };
    let mut given_i: Option<(u32, usize, usize)> = None;
    let mut given_j: Option<(u32, usize, usize)> = None;
    let mut tasks: Vec<(Task, usize, usize)> = Vec::new();

    for (no, full) in input.lines().enumerate() {
        let text = full.split('#').next().unwrap_or("");
        let line = Line { no: no + 1, text };
        let toks = line.tokens();
        let Some(head) = toks.first().copied() else {
            continue;
        };
        match head.text {
            "prism" => {
                if prism.is_some() {
                    return line.err(head.col, "second prism line");
                }
                let kv = line.pairs(&toks[1..], &["p", "N", "mode", "K"])?;
                let get = |k: &str| kv.iter().find(|(k2, _)| *k2 == k).map(|x| x.1);
                let need = |k: &str| get(k).map_or_else(|| line.err(head.col, format!("prism needs {k}=")), Ok);
                let pt = need("p")?;
                let p: u64 = line.int(pt, "p")?;
                if !is_prime(p) {
                    return line.err(pt.col, format!("p={p} is not prime"));
                }
                let nt = need("N")?;
                let n: u32 = line.int(nt, "N")?;
                if n == 0 {
                    return line.err(nt.col, "N must be at least 1");
                }
                if let Err(e) = Modulus::new(p, n) {
                    return line.err(nt.col, e.to_string());
                }
                let mt = need("mode")?;
                let (mode, kcol) = match (mt.text, get("K")) {
                    ("crystalline", None) => (PrismMode::Crystalline, mt.col),
                    ("crystalline", Some(kt)) => return line.err(kt.col, "K is only used with mode=qdr"),
                    ("qdr", Some(kt)) => {
                        let k: u32 = line.int(kt, "K")?;
                        (PrismMode::QDeRham { k }, kt.col)
                    }
                    ("qdr", None) => return line.err(mt.col, "mode=qdr needs K="),
                    (other, _) => return line.err(mt.col, format!("unknown mode '{other}'")),
                };
                prism = Some((line.no, mode, p, n, kcol));
            }
            "ring" => {
                let (name, cap, pd) = match toks.as_slice() {
                    [_, name, kw, cap] if kw.text == "cap" => (*name, *cap, false),
                    [_, name, kw, cap, flag] if kw.text == "cap" => {
                        if flag.text != "pd" {
                            return line.err(flag.col, format!("expected 'pd', found '{}'", flag.text));
                        }
                        (*name, *cap, true)
                    }
                    _ => return line.err(head.col, "expected 'ring <name> cap <int> [pd]'"),
                };
                if !is_identifier(name.text) {
                    return line.err(name.col, format!("'{}' is not a valid generator name", name.text));
                }
                if gens.iter().any(|g| g.name == name.text) {
                    return line.err(name.col, format!("generator '{}' declared twice", name.text));
                }
                let c: u32 = line.int(cap, "cap")?;
                if c == 0 {
                    return line.err(cap.col, "cap must be at least 1");
                }
                gens.push(if pd {
                    GeneratorSpec::divided_power(name.text, c)
                } else {
                    GeneratorSpec::polynomial(name.text, c)
                });
                gen_lines.push((line.no, name.col));
            }
            "higgs" => {
                if rank.is_some() {
                    return line.err(head.col, "second higgs line");
                }
                let kv = line.pairs(&toks[1..], &["rank"])?;
                let Some((_, rt)) = kv.first() else {
                    return line.err(head.col, "higgs needs rank=");
                };
                let r: usize = line.int(*rt, "rank")?;
                if r == 0 {
                    return line.err(rt.col, "rank must be at least 1");
                }
                rank = Some((r, line.no));
            }
            "theta" => {
                raw_thetas.push(parse_theta(&line, head.col + 5)?);
            }
            "caps" => {
                if caps_line.is_some() {
                    return line.err(head.col, "second caps line");
                }
                caps_line = Some(line.no);
                for (k, t) in line.pairs(&toks[1..], &["W", "imax", "jmax", "nilbound"])? {
                    let v: u32 = line.int(t, k)?;
                    match k {
                        "W" if v == 0 => return line.err(t.col, "W must be at least 1"),
                        "W" => caps.w = Some(v),
                        "imax" => given_i = Some((v, line.no, t.col)),
                        "jmax" => given_j = Some((v, line.no, t.col)),
                        _ => caps.nil_bound = v,
                    }
                }
            }
            "task" => {
                let [_, name] = toks.as_slice() else {
                    return line.err(head.col, "expected 'task <name>'");
                };
                let Some(t) = Task::from_name(name.text) else {
                    return line.err(name.col, format!("unknown task '{}'", name.text));
                };
                if tasks.iter().any(|x| x.0 == t) {
                    return line.err(name.col, format!("task '{}' requested twice", name.text));
                }
                tasks.push((t, line.no, name.col));
            }
            other => return line.err(head.col, format!("unknown directive '{other}'")),
        }
    }

    let at_end = |msg: &str| ParseError {
        line: input.lines().count().max(1),
        column: 1,
        message: msg.to_string(),
    };
    let (prism_line, mode, p, precision, kcol) = prism.ok_or_else(|| at_end("missing prism line"))?;
    let (rank, _) = rank.ok_or_else(|| at_end("missing higgs line"))?;
    if gens.is_empty() {
        return Err(at_end("no ring generators declared"));
    }
    if let Some(pos) = gens.iter().position(|g| g.name == Q_GENERATOR) {
        if matches!(mode, PrismMode::QDeRham { .. }) {
            let (l, c) = gen_lines[pos];
            return Err(ParseError {
                line: l,
                column: c,
                message: format!("'{Q_GENERATOR}' is reserved for q - 1 in mode=qdr"),
            });
        }
    }
    let ring = RingSpec {
        p,
        precision,
        mode,
        gens,
    };
    let n = ring.n();
    let algebra = ring.algebra().map_err(|e| ParseError {
        line: prism_line,
        column: kcol,
        message: e.to_string(),
    })?;

    caps.i_max = n as u32 + 1;
    caps.j_max = n as u32;
    for (given, default, name, slot) in [
        (given_i, n as u32 + 1, "imax", &mut caps.i_max),
        (given_j, n as u32, "jmax", &mut caps.j_max),
    ] {
        if let Some((v, l, c)) = given {
            if v < default && tasks.iter().any(|t| t.0 == Task::CaCompare) {
                return Err(ParseError {
                    line: l,
                    column: c,
                    message: format!("{name}={v} is below the {default} needed by ca-compare"),
                });
            }
            *slot = v;
        }
    }
    if caps.w.is_none() {
        if let Some((t, l, c)) = tasks.iter().find(|t| t.0.needs_weight()) {
            return Err(ParseError {
                line: *l,
                column: *c,
                message: format!("task {} needs a caps line with W=", t.name()),
            });
        }
    }

    let mut entries: Vec<ThetaEntry> = Vec::new();
    let mut thetas = vec![FreeModuleMap::zeros(&algebra, rank, rank); n];
    for t in &raw_thetas {
        let [(i, ci), (r, cr), (c, cc)] = t.idx;
        let err = |col: usize, message: String| ParseError {
            line: t.line,
            column: col,
            message,
        };
        if i == 0 || i > n {
            return Err(err(ci, format!("theta index {i} outside 1..{n}")));
        }
        if r == 0 || r > rank {
            return Err(err(cr, format!("row {r} outside 1..{rank}")));
        }
        if c == 0 || c > rank {
            return Err(err(cc, format!("column {c} outside 1..{rank}")));
        }
        if entries.iter().any(|e| (e.i, e.row, e.col) == (i - 1, r - 1, c - 1)) {
            return Err(err(ci, format!("theta {i} [{r},{c}] given twice")));
        }
        let x = parse_element(&algebra, t.poly).map_err(|e| err(t.poly_col + e.column - 1, e.message))?;
        thetas[i - 1].set(r - 1, c - 1, &x);
        entries.push(ThetaEntry {
            i: i - 1,
            row: r - 1,
            col: c - 1,
            poly: t.poly.trim().to_string(),
        });
    }

    Ok(ProblemSpec {
        ring,
        rank,
        entries,
        caps,
        tasks: tasks.into_iter().map(|t| t.0).collect(),
        algebra,
        thetas,
    })
}
