//! Task execution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prismatic::algebra::FreeModuleMap;
use prismatic::cech::{build_grid, compare_with_dr, ConeCheck, GridShape, Verdict};
use prismatic::coefficients::ElementaryDivisors;
use prismatic::corpus::{base_change_maps, PrismMode};
use prismatic::delta::{check_delta_axioms, DeltaStructure};
use prismatic::duality::{build_pairing, cohomology_duality_table, verify_duality_iso};
use prismatic::higgs::{base_change, binom, check_higgs, dr_complex, HiggsModule, HiggsReport};
use prismatic::stratification::{
    check_cocycle, epsilon_from_theta, epsilon_inverse, theta_from_epsilon, Stratification,
};

use crate::report::{Report, Section};
use crate::spec::{ProblemSpec, Task};

/// Random pairs drawn for the δ-ring axiom suite in `check`.
pub const DELTA_TRIALS: usize = 200;

struct Ctx<'a> {
    spec: &'a ProblemSpec,
    seed: u64,
    report: HiggsReport,
    higgs: Option<HiggsModule>,
    strat: Option<Result<Stratification, String>>,
}

fn table(sec: &mut Section, name: &str, h: &std::collections::BTreeMap<i32, ElementaryDivisors>) {
    sec.heading(name);
    for (k, e) in h {
        sec.entry(format!("H^{k}"), e);
    }
}

fn ring_description(spec: &ProblemSpec) -> String {
    let m = spec.algebra.modulus();
    let base = match spec.ring.mode {
        PrismMode::Crystalline => format!("Z/{}^{}", m.p(), m.precision()),
        PrismMode::QDeRham { .. } => {
            let cap = spec.algebra.generators()[0].cap;
            format!("F_{}[u]/(u^{cap})", m.p())
        }
    };
    let gens: Vec<String> = spec
        .ring
        .gens
        .iter()
        .map(|g| {
            if g.is_pd() {
                format!("{}[<{}]", g.name, g.cap)
            } else {
                format!("{}^<{}", g.name, g.cap)
            }
        })
        .collect();
    format!("{base} [{}]", gens.join(", "))
}

fn commutator_witness(th: &[FreeModuleMap], i: usize, j: usize) -> String {
    let c = th[i].compose(&th[j]).and_then(|a| th[j].compose(&th[i]).and_then(|b| a.sub(&b)));
    if let Ok(c) = c {
        for r in 0..c.rows() {
            for s in 0..c.cols() {
                if !c.entry_is_zero(r, s) {
                    return format!(
                        "[theta_{}, theta_{}][{},{}] = {}",
                        i + 1,
                        j + 1,
                        r + 1,
                        s + 1,
                        c.entry(r, s)
                    );
                }
            }
        }
    }
    format!("[theta_{}, theta_{}] != 0", i + 1, j + 1)
}

fn check_section(ctx: &Ctx) -> Section {
    let spec = ctx.spec;
    let mut sec = Section::new("check");
    sec.entry("ring", ring_description(spec));
    sec.entry("ring length", spec.ring.length().unwrap_or(0));
    sec.entry("n", spec.n());
    sec.entry("rank", spec.rank);
    let rep = &ctx.report;
    sec.require("commuting", rep.commutator.is_none());
    if let Some((i, j)) = rep.commutator {
        sec.entry("witness", commutator_witness(&spec.thetas, i, j));
    } else {
        sec.require(format!("nilpotent within {}", rep.bound), rep.w_theta.is_some());
        if let Some(w) = rep.w_theta {
            sec.entry("W_theta", w);
        }
    }
    let polynomial = spec.ring.mode == PrismMode::Crystalline && spec.ring.gens.iter().all(|g| !g.is_pd());
    if polynomial {
        match DeltaStructure::trivial(&spec.algebra) {
            Ok(d) => {
                let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
                let ax = check_delta_axioms(&d, DELTA_TRIALS, &mut rng);
                sec.entry(
                    "delta-ring axioms",
                    format!("{} trials, seed {}", ax.trials, ctx.seed),
                );
                if let Some(c) = ax.counterexample {
                    sec.fail(format!("delta-ring axiom fails: {c}"));
                }
            }
            Err(e) => sec.fail(e.to_string()),
        }
    } else {
        sec.entry("delta-ring axioms", "not applicable");
    }
    sec
}

fn stratify_section(ctx: &Ctx) -> Section {
    let mut sec = Section::new("stratify");
    let (Some(h), Some(strat)) = (&ctx.higgs, &ctx.strat) else {
        sec.fail("no valid Higgs field");
        return sec;
    };
    let w = ctx.spec.caps.w.expect("checked at parse time");
    sec.entry("W", w);
    let s = match strat {
        Ok(s) => s,
        Err(e) => {
            sec.fail(e.clone());
            return sec;
        }
    };
    sec.entry("epsilon terms", s.coefficients().len());
    sec.require("epsilon' is a two-sided inverse", epsilon_inverse(s).is_ok());
    match theta_from_epsilon(s, h.twist_tag()) {
        Ok(h2) => {
            sec.require("theta -> epsilon -> theta exact", h2.thetas() == h.thetas());
            let back = epsilon_from_theta(&h2, w).map(|s2| s2.eps == s.eps);
            sec.require("epsilon -> theta -> epsilon exact", back.unwrap_or(false));
        }
        Err(e) => sec.fail(e.to_string()),
    }
    sec
}

fn cocycle_section(ctx: &Ctx) -> Section {
    let mut sec = Section::new("cocycle");
    let Some(Ok(s)) = &ctx.strat else {
        sec.fail("no stratification");
        return sec;
    };
    match check_cocycle(s) {
        Ok(rep) => {
            sec.require("weight-zero part is the identity", rep.weight_zero_identity);
            sec.require("cocycle condition", rep.witness.is_none());
            if let Some((a, b, mono, l, r)) = rep.witness {
                sec.entry(
                    "witness",
                    format!("entry [{},{}] coefficient of {mono}: {l} vs {r}", a + 1, b + 1),
                );
            }
        }
        Err(e) => sec.fail(e.to_string()),
    }
    sec
}

fn dr_section(ctx: &Ctx) -> Section {
    let mut sec = Section::new("dr");
    let Some(h) = &ctx.higgs else {
        sec.fail("no valid Higgs field");
        return sec;
    };
    let dr = match dr_complex(h) {
        Ok(c) => c,
        Err(e) => {
            sec.fail(e.to_string());
            return sec;
        }
    };
    let n = h.n();
    let ranks: Vec<String> = dr.degrees().map(|k| dr.rank(k).to_string()).collect();
    sec.entry("ranks", ranks.join(" "));
    let shaped = dr.lo() == 0
        && dr.hi() == n as i32
        && (0..=n).all(|k| dr.rank(k as i32) == binom(n, k) * h.rank());
    sec.require("free and concentrated in [0, n]", shaped);
    table(&mut sec, "cohomology", &dr.cohomology());
    sec
}

fn cones(sec: &mut Section, name: &str, checks: &[ConeCheck]) {
    sec.heading(name);
    for c in checks {
        sec.entry(
            format!("degree {}", c.degree),
            format!("{} (raw length {})", c.verdict, c.raw_length),
        );
        sec.merge(c.verdict);
    }
}

fn ca_section(ctx: &Ctx) -> Section {
    let mut sec = Section::new("ca-compare");
    let (Some(h), Some(Ok(s))) = (&ctx.higgs, &ctx.strat) else {
        sec.fail("no stratification");
        return sec;
    };
    let caps = ctx.spec.caps;
    let n = h.n() as u32;
    let shape = GridShape {
        i_max: caps.i_max,
        j_max: caps.j_max,
        total_max: Some(n + 1),
    };
    let w = caps.w.expect("checked at parse time");
    let rep = match build_grid(h, s, shape, w).and_then(|d| compare_with_dr(&d)) {
        Ok(r) => r,
        Err(e) => {
            sec.fail(e.to_string());
            return sec;
        }
    };
    sec.entry("W", rep.w);
    sec.entry("trusted window", format!("weight < {}", rep.window));
    sec.entry("grid", format!("i <= {}, j <= {}, i + j <= {}", caps.i_max, caps.j_max, n + 1));
    table(&mut sec, "CA", &rep.ca);
    table(&mut sec, "DR", &rep.dr);
    table(&mut sec, "Tot", &rep.total);
    cones(&mut sec, "cone(Tot -> CA)", &rep.cone_ca);
    cones(&mut sec, "cone(Tot -> DR)", &rep.cone_dr);
    sec.heading("agreement");
    for (k, v) in &rep.agreement {
        sec.entry(format!("H^{k}"), v);
        sec.merge(*v);
    }
    if sec.verdict == Verdict::ArtifactAtTopWeight {
        sec.warn("discrepancies only at the top weight; raise W to confirm");
    }
    sec
}

fn duality_section(ctx: &Ctx) -> Section {
    let mut sec = Section::new("duality");
    let Some(h) = &ctx.higgs else {
        sec.fail("no valid Higgs field");
        return sec;
    };
    let res = build_pairing(h).and_then(|w| {
        let rep = verify_duality_iso(&w)?;
        let table = cohomology_duality_table(&w)?;
        Ok((rep, table))
    });
    match res {
        Ok((rep, table)) => {
            sec.require("chain map", rep.chain_map_failure.is_none());
            if let Some(i) = rep.chain_map_failure {
                sec.entry("first failing degree", i);
            }
            sec.require("degreewise bijective", rep.bijectivity_failure.is_none());
            let n = h.n() as i32;
            sec.heading("H^i(DR(M^v{n})) vs H^{n-i}(DR(M))");
            for (i, a, b) in table {
                sec.entry(format!("H^{i}"), format!("{a} | H^{} = {b}", n - i));
            }
        }
        Err(e) => sec.fail(e.to_string()),
    }
    sec
}

fn base_change_section(ctx: &Ctx) -> Section {
    let mut sec = Section::new("base-change");
    let Some(h) = &ctx.higgs else {
        sec.fail("no valid Higgs field");
        return sec;
    };
    let maps = match base_change_maps(&ctx.spec.ring) {
        Ok(m) => m,
        Err(e) => {
            sec.fail(e.to_string());
            return sec;
        }
    };
    sec.entry("maps", maps.len());
    sec.heading("DR(M) (x) R' -> DR(M (x) R')");
    for (name, f) in &maps {
        match base_change(h, f) {
            Ok(_) => sec.entry(name.clone(), "isomorphism"),
            Err(e) => {
                sec.entry(name.clone(), format!("FAIL: {e}"));
                sec.verdict = Verdict::Fail;
            }
        }
    }
    sec
}

/// Runs every requested task. Prerequisites are computed once, then the
/// sections are built independently and reported in request order.
pub fn run(spec: &ProblemSpec, seed: u64) -> Report {
    let raw = HiggsModule::new(&spec.algebra, spec.rank, spec.thetas.clone(), 0)
        .expect("shapes validated at parse time");
    let report = check_higgs(&raw, spec.caps.nil_bound);
    let higgs = if report.valid() { raw.certify(spec.caps.nil_bound).ok() } else { None };
    let strat = match (&higgs, spec.caps.w) {
        (Some(h), Some(w)) if spec.tasks.iter().any(|t| t.needs_weight()) => {
            Some(epsilon_from_theta(h, w).map_err(|e| e.to_string()))
        }
        _ => None,
    };
    let ctx = Ctx {
        spec,
        seed,
        report,
        higgs,
        strat,
    };
    let sections = prismatic::par::map(&spec.tasks, |t| {
        let mut sec = match t {
            Task::Check => check_section(&ctx),
            Task::Stratify => stratify_section(&ctx),
            Task::Cocycle => cocycle_section(&ctx),
            Task::Dr => dr_section(&ctx),
            Task::CaCompare => ca_section(&ctx),
            Task::Duality => duality_section(&ctx),
            Task::BaseChange => base_change_section(&ctx),
        };
        if *t != Task::Check && ctx.higgs.is_none() && sec.verdict == Verdict::Fail {
            sec.warn("the Higgs field failed its check");
        }
        sec
    });
    Report { sections }
}
