//! A fixed corpus of small Higgs modules with their `.prism` renderings, and
//! the standard ring maps used for base change.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::algebra::{FreeModuleMap, GeneratorKind, GeneratorSpec, RingMap, TruncatedAlgebra};
use crate::coefficients::Modulus;
pub use crate::delta::PrismMode;
use crate::higgs::{HiggsModule, DEFAULT_NIL_BOUND};
use crate::poly::parse_element;
use crate::{Error, Result};

/// Every task the front end knows, in dependency order.
pub const ALL_TASKS: [&str; 7] = [
    "check",
    "stratify",
    "cocycle",
    "dr",
    "ca-compare",
    "duality",
    "base-change",
];

/// Name of the base generator `u = q - 1` in q-de Rham mode.
pub const Q_GENERATOR: &str = "u";

/// The base prism and the coordinates `T_1..T_n` of the ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingSpec {
    pub p: u64,
    pub precision: u32,
    pub mode: PrismMode,
    pub gens: Vec<GeneratorSpec>,
}

impl RingSpec {
    pub fn crystalline(p: u64, precision: u32, gens: &[(&str, u32, bool)]) -> Self {
        RingSpec {
            p,
            precision,
            mode: PrismMode::Crystalline,
            gens: gens
                .iter()
                .map(|&(name, cap, pd)| {
                    if pd {
                        GeneratorSpec::divided_power(name, cap)
                    } else {
                        GeneratorSpec::polynomial(name, cap)
                    }
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.gens.len()
    }

    /// Coefficient modulus and cap of `u` for the base. In q-mode the base
    /// `Z/p^N[q]/((q-1)^K, [p]_q)` equals `F_p[u]/(u^e)` with
    /// `e = min(K, p - 1)` whenever `N = 1` or `K <= p - 1`; other cases are
    /// rejected.
    pub fn base(&self) -> Result<(Modulus, Option<u32>)> {
        match self.mode {
            PrismMode::Crystalline => Ok((Modulus::new(self.p, self.precision)?, None)),
            PrismMode::QDeRham { k } => {
                if k == 0 {
                    return Err(Error::Invalid("K must be at least 1".into()));
                }
                if self.precision > 1 && k as u64 > self.p - 1 {
                    return Err(Error::Invalid(format!(
                        "q-mode needs N = 1 or K <= p - 1 (got N={}, K={k}, p={})",
                        self.precision, self.p
                    )));
                }
                let e = (k as u64).min(self.p - 1) as u32;
                Ok((Modulus::new(self.p, 1)?, Some(e)))
            }
        }
    }

    pub fn algebra(&self) -> Result<Arc<TruncatedAlgebra>> {
        self.algebra_with(&self.gens)
    }

    fn algebra_with(&self, gens: &[GeneratorSpec]) -> Result<Arc<TruncatedAlgebra>> {
        let (m, u) = self.base()?;
        let mut all = Vec::new();
        if let Some(e) = u {
            all.push(GeneratorSpec::polynomial(Q_GENERATOR, e));
        }
        all.extend(gens.iter().cloned());
        TruncatedAlgebra::new(m, all, None)
    }

    /// Length of the ring as a `Z_p`-module.
    pub fn length(&self) -> Result<u64> {
        let a = self.algebra()?;
        Ok(a.dim() as u64 * a.modulus().precision() as u64)
    }

    fn prism_line(&self) -> String {
        match self.mode {
            PrismMode::Crystalline => {
                format!("prism p={} N={} mode=crystalline", self.p, self.precision)
            }
            PrismMode::QDeRham { k } => {
                format!("prism p={} N={} mode=qdr K={k}", self.p, self.precision)
            }
        }
    }
}

/// One entry `θ_i[row, col]`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaEntry {
    pub i: usize,
    pub row: usize,
    pub col: usize,
    pub poly: String,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub ring: RingSpec,
    pub rank: usize,
    pub entries: Vec<ThetaEntry>,
    /// PD weight cap used for the stratification and the Čech grid.
    pub w: u32,
    pub nil_bound: u32,
}

/// Builds the θ matrices of a ring from polynomial entries.
pub fn theta_matrices(
    alg: &Arc<TruncatedAlgebra>,
    n: usize,
    rank: usize,
    entries: &[ThetaEntry],
) -> Result<Vec<FreeModuleMap>> {
    let mut th = vec![FreeModuleMap::zeros(alg, rank, rank); n];
    for e in entries {
        if e.i >= n || e.row >= rank || e.col >= rank {
            return Err(Error::Shape(format!(
                "entry theta {} [{},{}] out of range",
                e.i + 1,
                e.row + 1,
                e.col + 1
            )));
        }
        let x = parse_element(alg, &e.poly).map_err(|err| Error::Invalid(err.to_string()))?;
        th[e.i].set(e.row, e.col, &x);
    }
    Ok(th)
}

impl Instance {
    pub fn n(&self) -> usize {
        self.ring.n()
    }

    pub fn module(&self) -> Result<HiggsModule> {
        let alg = self.ring.algebra()?;
        let th = theta_matrices(&alg, self.n(), self.rank, &self.entries)?;
        HiggsModule::certified(&alg, self.rank, th, 0, self.nil_bound)
    }

    /// The instance as a `.prism` file requesting `tasks`.
    pub fn render(&self, tasks: &[&str]) -> String {
        let n = self.n();
        let mut s = String::new();
        writeln!(s, "# {}", self.name).unwrap();
        writeln!(s, "{}", self.ring.prism_line()).unwrap();
        for g in &self.ring.gens {
            let pd = if g.kind == GeneratorKind::DividedPower { " pd" } else { "" };
            writeln!(s, "ring {} cap {}{pd}", g.name, g.cap).unwrap();
        }
        writeln!(s, "higgs rank={}", self.rank).unwrap();
        for e in &self.entries {
            writeln!(s, "theta {} [{},{}] = {}", e.i + 1, e.row + 1, e.col + 1, e.poly).unwrap();
        }
        writeln!(
            s,
            "caps W={} imax={} jmax={} nilbound={}",
            self.w,
            n + 1,
            n,
            self.nil_bound
        )
        .unwrap();
        for t in tasks {
            writeln!(s, "task {t}").unwrap();
        }
        s
    }
}

type Raw = (
    &'static str,
    RingSpec,
    usize,
    &'static [(usize, usize, usize, &'static str)],
);

fn raw_corpus() -> Vec<Raw> {
    let c = RingSpec::crystalline;
    let q = |p: u64, k: u32, gens: &[(&str, u32)]| RingSpec {
        p,
        precision: 1,
        mode: PrismMode::QDeRham { k },
        gens: gens.iter().map(|&(g, cap)| GeneratorSpec::polynomial(g, cap)).collect(),
    };
    vec![
        ("c01", c(2, 1, &[("T", 4, false)]), 1, &[]),
        ("c02", c(2, 1, &[("T", 4, false)]), 1, &[(1, 1, 1, "T")]),
        ("c03", c(2, 2, &[("T", 3, false)]), 1, &[(1, 1, 1, "2")]),
        ("c04", c(2, 2, &[("T", 3, false)]), 1, &[(1, 1, 1, "T + 2")]),
        ("c05", c(2, 2, &[("T", 2, false)]), 2, &[(1, 1, 2, "1")]),
        (
            "c06",
            c(2, 2, &[("T", 2, false)]),
            2,
            &[(1, 1, 1, "T"), (1, 1, 2, "2"), (1, 2, 2, "T")],
        ),
        ("c07", c(3, 1, &[("T", 3, false)]), 1, &[]),
        ("c08", c(3, 1, &[("T", 3, false)]), 1, &[(1, 1, 1, "T^2")]),
        ("c09", c(3, 2, &[("T", 2, false)]), 1, &[(1, 1, 1, "3")]),
        ("c10", c(3, 2, &[("T", 2, false)]), 1, &[(1, 1, 1, "T")]),
        (
            "c11",
            c(3, 2, &[("T", 2, false)]),
            2,
            &[(1, 1, 1, "T"), (1, 1, 2, "3"), (1, 2, 1, "T"), (1, 2, 2, "-T")],
        ),
        (
            "c12",
            c(3, 1, &[("T", 4, false)]),
            2,
            &[(1, 1, 2, "T"), (1, 2, 1, "1")],
        ),
        ("c13", c(5, 1, &[("T", 3, false)]), 1, &[]),
        ("c14", c(5, 1, &[("T", 3, false)]), 1, &[(1, 1, 1, "T")]),
        (
            "c15",
            c(5, 1, &[("T", 3, false)]),
            2,
            &[(1, 1, 1, "T"), (1, 1, 2, "1"), (1, 2, 2, "T")],
        ),
        ("c16", c(5, 2, &[("T", 2, false)]), 1, &[(1, 1, 1, "5 + T")]),
        ("c17", c(5, 2, &[("T", 1, false)]), 1, &[(1, 1, 1, "5")]),
        (
            "c18",
            c(5, 2, &[("T", 1, false)]),
            2,
            &[(1, 1, 2, "5"), (1, 2, 1, "5")],
        ),
        ("c19", c(2, 1, &[("x", 4, true)]), 1, &[(1, 1, 1, "x[1]")]),
        ("c20", c(3, 1, &[("x", 3, true)]), 1, &[(1, 1, 1, "x[2]")]),
        ("c21", c(2, 3, &[("T", 2, false)]), 1, &[(1, 1, 1, "2*T + 4")]),
        (
            "c22",
            c(3, 1, &[("T", 3, false)]),
            2,
            &[(1, 1, 1, "T"), (1, 2, 2, "2*T")],
        ),
        ("q01", q(3, 2, &[("T", 2)]), 1, &[(1, 1, 1, "u")]),
        ("q02", q(5, 3, &[("T", 2)]), 1, &[(1, 1, 1, "u*T + T")]),
        ("d01", c(2, 1, &[("T1", 2, false), ("T2", 2, false)]), 1, &[]),
        (
            "d02",
            c(2, 1, &[("T1", 2, false), ("T2", 2, false)]),
            1,
            &[(1, 1, 1, "T1"), (2, 1, 1, "T2")],
        ),
        (
            "d03",
            c(3, 1, &[("T1", 2, false), ("T2", 2, false)]),
            1,
            &[(1, 1, 1, "T2"), (2, 1, 1, "T1")],
        ),
        (
            "d04",
            c(5, 1, &[("T1", 2, false), ("T2", 2, false)]),
            1,
            &[(1, 1, 1, "T1")],
        ),
        (
            "d05",
            c(2, 2, &[("T1", 1, false), ("T2", 1, false)]),
            1,
            &[(1, 1, 1, "2")],
        ),
        (
            "d06",
            c(3, 2, &[("T1", 1, false), ("T2", 1, false)]),
            1,
            &[(1, 1, 1, "3"), (2, 1, 1, "3")],
        ),
        (
            "d07",
            c(2, 2, &[("T1", 1, false), ("T2", 1, false)]),
            2,
            &[(1, 1, 2, "2"), (2, 1, 2, "1")],
        ),
        (
            "d08",
            c(3, 1, &[("T1", 2, false), ("T2", 2, false)]),
            2,
            &[(1, 1, 2, "1"), (2, 1, 2, "T1")],
        ),
        (
            "d09",
            c(5, 1, &[("T1", 3, false), ("T2", 2, false)]),
            1,
            &[(1, 1, 1, "T1*T2"), (2, 1, 1, "T2")],
        ),
        (
            "d10",
            c(2, 1, &[("T1", 3, false), ("T2", 2, false)]),
            1,
            &[(1, 1, 1, "T1^2"), (2, 1, 1, "T1")],
        ),
    ]
}

/// The corpus, with `W = W_θ + n + 2` for every instance.
pub fn instances() -> Vec<Instance> {
    raw_corpus()
        .into_iter()
        .map(|(name, ring, rank, entries)| {
            let mut inst = Instance {
                name: name.to_string(),
                ring,
                rank,
                entries: entries
                    .iter()
                    .map(|&(i, row, col, poly)| ThetaEntry {
                        i: i - 1,
                        row: row - 1,
                        col: col - 1,
                        poly: poly.to_string(),
                    })
                    .collect(),
                w: 0,
                nil_bound: DEFAULT_NIL_BOUND,
            };
            let h = inst
                .module()
                .unwrap_or_else(|e| panic!("corpus instance {name} is invalid: {e}"));
            inst.w = h.w_theta().expect("certified") + inst.n() as u32 + 2;
            inst
        })
        .collect()
}

fn replace_gen(gens: &[GeneratorSpec], g: usize, cap: u32) -> Vec<GeneratorSpec> {
    let mut out = gens.to_vec();
    out[g].cap = cap;
    out
}

/// Standard ring maps out of `ring`'s algebra, fixing the base: killing a
/// coordinate, lowering a cap, `T -> T + T^2`, `T -> (1 + p) T`, and swapping
/// two coordinates with equal caps.
pub fn base_change_maps(ring: &RingSpec) -> Result<Vec<(String, RingMap)>> {
    let src = ring.algebra()?;
    let offset = src.ngens() - ring.n();
    let ident = |a: &Arc<TruncatedAlgebra>| -> Vec<_> { (0..a.ngens()).map(|g| a.generator(g)).collect() };
    let mut out = vec![("identity".to_string(), RingMap::identity(&src))];
    for (k, g) in ring.gens.iter().enumerate() {
        let gi = offset + k;
        if g.cap >= 2 {
            let tgt = ring.algebra_with(&replace_gen(&ring.gens, k, 1))?;
            let mut im = ident(&tgt);
            im[gi] = tgt.zero();
            out.push((format!("{} -> 0", g.name), RingMap::from_generator_images(&src, &tgt, im)?));
        }
        if g.cap >= 3 {
            let tgt = ring.algebra_with(&replace_gen(&ring.gens, k, g.cap - 1))?;
            let im = ident(&tgt);
            out.push((
                format!("{} cap {} -> {}", g.name, g.cap, g.cap - 1),
                RingMap::from_generator_images(&src, &tgt, im)?,
            ));
        }
        if g.kind == GeneratorKind::Polynomial && g.cap >= 3 {
            let mut im = ident(&src);
            im[gi] = src.generator(gi).add(&src.generator(gi).pow(2));
            out.push((
                format!("{0} -> {0} + {0}^2", g.name),
                RingMap::from_generator_images(&src, &src, im)?,
            ));
        }
        if g.cap >= 2 && src.modulus().precision() >= 2 {
            let mut im = ident(&src);
            im[gi] = src.generator(gi).scale(ring.p + 1);
            out.push((
                format!("{0} -> {1}*{0}", g.name, ring.p + 1),
                RingMap::from_generator_images(&src, &src, im)?,
            ));
        }
    }
    for a in 0..ring.n() {
        for b in a + 1..ring.n() {
            let (ga, gb) = (&ring.gens[a], &ring.gens[b]);
            if ga.cap == gb.cap && ga.kind == gb.kind && ga.cap >= 2 {
                let mut im = ident(&src);
                im.swap(offset + a, offset + b);
                out.push((
                    format!("{} <-> {}", ga.name, gb.name),
                    RingMap::from_generator_images(&src, &src, im)?,
                ));
            }
        }
    }
    Ok(out)
}
