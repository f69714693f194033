//! Stratifications `ε : M -> M ⊗ R^PD(1)` and their correspondence with
//! Higgs fields.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{
    pd_level, same_algebra, AlgebraElement, FreeModuleMap, RingMap, TruncatedAlgebra,
};
use crate::higgs::{check_higgs, HiggsModule, DEFAULT_NIL_BOUND};
use crate::{Error, Result};

/// The cosimplicial level `R^PD(m)` over `R` in `n` directions, truncated at
/// total weight `< w`.
#[derive(Clone, Debug)]
pub struct PDLevel {
    pub m: u32,
    pub n: u32,
    pub w: u32,
    base: Arc<TruncatedAlgebra>,
    alg: Arc<TruncatedAlgebra>,
}

impl PDLevel {
    pub fn new(base: &Arc<TruncatedAlgebra>, n: u32, m: u32, w: u32) -> Result<Self> {
        let alg = if m == 0 || n == 0 {
            base.clone()
        } else {
            pd_level(base, n, m, w)?
        };
        Ok(PDLevel {
            m,
            n,
            w,
            base: base.clone(),
            alg,
        })
    }

    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    pub fn base(&self) -> &Arc<TruncatedAlgebra> {
        &self.base
    }

    /// Generator index of `ξ_{i,j}/d` (1-based `i`, `j`).
    pub fn xi_index(&self, i: u32, j: u32) -> usize {
        self.base.ngens() + ((j - 1) * self.n + (i - 1)) as usize
    }

    /// The structure map `R -> R^PD(m)`.
    pub fn inclusion(&self) -> RingMap {
        let images = (0..self.base.ngens()).map(|g| self.alg.generator(g)).collect();
        RingMap::from_generator_images(&self.base, &self.alg, images).expect("base generators")
    }

    /// Exponent vector of the monomial `Π_i (ξ_{i,j}/d)^[m_i]` in slot `j`.
    pub fn xi_exponents(&self, j: u32, m: &[u32]) -> Vec<u32> {
        let mut e = vec![0u32; self.alg.ngens()];
        for (i, &k) in m.iter().enumerate() {
            e[self.xi_index(i as u32 + 1, j)] = k;
        }
        e
    }

    /// Splits a basis index into (base exponents, ξ exponents).
    pub fn split_exponents(&self, idx: usize) -> (Vec<u32>, Vec<u32>) {
        let e = self.alg.exponents(idx);
        let b = self.base.ngens();
        (e[..b].to_vec(), e[b..].to_vec())
    }

    /// Coefficients of `x` as a polynomial in the `ξ`'s over `R`, keyed by
    /// the ξ exponent vector.
    pub fn decompose(&self, x: &AlgebraElement) -> BTreeMap<Vec<u32>, AlgebraElement> {
        let mut out: BTreeMap<Vec<u32>, AlgebraElement> = BTreeMap::new();
        for (idx, c) in x.support() {
            let (be, xe) = self.split_exponents(idx);
            let bi = self.base.index_of(&be).expect("base monomial");
            let coef = self.base.basis_element(bi).scale(c);
            out.entry(xe)
                .and_modify(|v| *v = v.add(&coef))
                .or_insert(coef);
        }
        out
    }
}

/// An order-preserving map `[m] -> [target]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexMap {
    values: Vec<u32>,
    target: u32,
}

impl SimplexMap {
    pub fn new(values: Vec<u32>, target: u32) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("simplex map needs a source".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid(format!("{values:?} is not monotone")));
        }
        if values.iter().any(|&v| v > target) {
            return Err(Error::Invalid(format!("{values:?} leaves [0, {target}]")));
        }
        Ok(SimplexMap { values, target })
    }

    /// The coface `[m-1] -> [m]` missing `k`.
    pub fn coface(m: u32, k: u32) -> Self {
        let values = (0..m).map(|x| if x < k { x } else { x + 1 }).collect();
        SimplexMap { values, target: m }
    }

    /// The codegeneracy `[m+1] -> [m]` hitting `k` twice.
    pub fn codegeneracy(m: u32, k: u32) -> Self {
        let values = (0..m + 2).map(|x| if x <= k { x } else { x - 1 }).collect();
        SimplexMap { values, target: m }
    }

    pub fn source_level(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    pub fn target_level(&self) -> u32 {
        self.target
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimplexMap) -> Result<SimplexMap> {
        if other.source_level() != self.target {
            return Err(Error::Invalid("simplex maps are not composable".into()));
        }
        SimplexMap::new(
            self.values.iter().map(|&v| other.values[v as usize]).collect(),
            other.target,
        )
    }
}

/// `ξ_{i,j}/d ↦ Σ_{s=f(j-1)+1}^{f(j)} ξ_{i,s}/d`, identity on `R`.
pub fn simplex_pushforward(f: &SimplexMap, src: &PDLevel, tgt: &PDLevel) -> Result<RingMap> {
    if f.source_level() != src.m || f.target_level() != tgt.m {
        return Err(Error::Invalid(format!(
            "simplex map [{}]->[{}] between levels {} and {}",
            f.source_level(),
            f.target_level(),
            src.m,
            tgt.m
        )));
    }
    if !same_algebra(&src.base, &tgt.base) || src.n != tgt.n {
        return Err(Error::Invalid("levels over different bases".into()));
    }
    let mut images: Vec<AlgebraElement> =
        (0..src.base.ngens()).map(|g| tgt.alg.generator(g)).collect();
    for j in 1..=src.m {
        for i in 1..=src.n {
            let (a, b) = (f.values[j as usize - 1], f.values[j as usize]);
            let mut im = tgt.alg.zero();
            for s in a + 1..=b {
                im = im.add(&tgt.alg.generator(tgt.xi_index(i, s)));
            }
            images.push(im);
        }
    }
    RingMap::from_generator_images(&src.alg, &tgt.alg, images)
}

/// `ε` as an `r x r` matrix over `R^PD(1)`.
#[derive(Clone, Debug)]
pub struct Stratification {
    pub level1: PDLevel,
    pub eps: FreeModuleMap,
}

impl Stratification {
    pub fn new(level1: PDLevel, eps: FreeModuleMap) -> Result<Self> {
        if level1.m != 1 || !same_algebra(eps.algebra(), &level1.alg) {
            return Err(Error::Invalid("ε must be a matrix over R^PD(1)".into()));
        }
        if eps.rows() != eps.cols() {
            return Err(Error::Shape("ε must be square".into()));
        }
        Ok(Stratification { level1, eps })
    }

    pub fn rank(&self) -> usize {
        self.eps.rows()
    }

    /// `Θ_m`, the matrix coefficient of `(ξ/d)^[m]`, for every `m` present.
    pub fn coefficients(&self) -> BTreeMap<Vec<u32>, FreeModuleMap> {
        let r = self.rank();
        let base = &self.level1.base;
        let mut out: BTreeMap<Vec<u32>, FreeModuleMap> = BTreeMap::new();
        for a in 0..r {
            for b in 0..r {
                let e = self.eps.entry(a, b);
                for (m, c) in self.level1.decompose(&e) {
                    out.entry(m)
                        .or_insert_with(|| FreeModuleMap::zeros(base, r, r))
                        .set(a, b, &c);
                }
            }
        }
        out
    }

    /// Is the weight-zero part the identity?
    pub fn weight_zero_is_identity(&self) -> bool {
        let zero = vec![0u32; self.level1.n as usize];
        let id = FreeModuleMap::identity(&self.level1.base, self.rank());
        self.coefficients()
            .get(&zero)
            .is_some_and(|m| *m == id)
    }
}

/// Multi-indices `m` in `n` variables with `|m| <= d`, graded.
pub fn multi_indices(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    let mut frontier = out.clone();
    for _ in 0..d {
        let mut next = Vec::new();
        for m in &frontier {
            let last = m.iter().rposition(|&x| x > 0).unwrap_or(0);
            for i in last..n {
                let mut k = m.clone();
                k[i] += 1;
                next.push(k);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn series(level: &PDLevel, terms: &[(Vec<u32>, FreeModuleMap)], j: u32) -> Result<FreeModuleMap> {
    let incl = level.inclusion();
    let r = terms.first().map_or(0, |t| t.1.rows());
    let mut out = FreeModuleMap::zeros(&level.alg, r, r);
    for (m, a) in terms {
        let Some(idx) = level.alg.index_of(&level.xi_exponents(j, m)) else {
            continue;
        };
        let mono = level.alg.basis_element(idx);
        out = out.add(&a.map_entries(&incl)?.scale_by(&mono))?;
    }
    Ok(out)
}

/// `ε = Σ_m θ^m ⊗ (ξ/d)^[m]`; refuses caps that would truncate the series.
pub fn epsilon_from_theta(h: &HiggsModule, w: u32) -> Result<Stratification> {
    let wt = match h.w_theta() {
        Some(x) => x,
        None => check_higgs(h, DEFAULT_NIL_BOUND)
            .w_theta
            .ok_or_else(|| Error::Invalid("θ carries no nilpotency certificate".into()))?,
    };
    if w <= wt {
        return Err(Error::Invalid(format!(
            "weight cap {w} would truncate the series (W_θ = {wt})"
        )));
    }
    let level1 = PDLevel::new(h.algebra(), h.n() as u32, 1, w)?;
    let terms: Vec<(Vec<u32>, FreeModuleMap)> = multi_indices(h.n(), wt)
        .into_iter()
        .map(|m| {
            let t = h.theta_power(&m);
            (m, t)
        })
        .collect();
    let eps = series(&level1, &terms, 1)?;
    Stratification::new(level1, eps)
}

/// `ε' = Σ_m (-1)^{|m|} Θ_m (ξ/d)^[m]`, verified two-sided.
pub fn epsilon_inverse(s: &Stratification) -> Result<FreeModuleMap> {
    let terms: Vec<(Vec<u32>, FreeModuleMap)> = s
        .coefficients()
        .into_iter()
        .map(|(m, a)| {
            let odd = m.iter().sum::<u32>() % 2 == 1;
            (m, if odd { a.neg() } else { a })
        })
        .collect();
    let inv = series(&s.level1, &terms, 1)?;
    let id = FreeModuleMap::identity(&s.level1.alg, s.rank());
    if inv.compose(&s.eps)? != id || s.eps.compose(&inv)? != id {
        return Err(Error::Verification("ε' is not a two-sided inverse of ε".into()));
    }
    Ok(inv)
}

/// `θ_i` = coefficient of `(ξ_i/d)^[1]`; the result is certified.
pub fn theta_from_epsilon(s: &Stratification, twist: i32) -> Result<HiggsModule> {
    if !s.weight_zero_is_identity() {
        return Err(Error::Invalid("weight-zero part of ε is not the identity".into()));
    }
    let n = s.level1.n as usize;
    let base = &s.level1.base;
    let coeffs = s.coefficients();
    let thetas = (0..n)
        .map(|i| {
            let mut e = vec![0u32; n];
            e[i] = 1;
            coeffs
                .get(&e)
                .cloned()
                .unwrap_or_else(|| FreeModuleMap::zeros(base, s.rank(), s.rank()))
        })
        .collect();
    HiggsModule::certified(base, s.rank(), thetas, twist, DEFAULT_NIL_BOUND)
}

/// Outcome of [`check_cocycle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleReport {
    pub weight_zero_identity: bool,
    /// First differing coefficient: `(row, col, monomial, lhs, rhs)`.
    pub witness: Option<(usize, usize, String, u64, u64)>,
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        self.weight_zero_identity && self.witness.is_none()
    }
}

/// Compares `δ̄_1(ε)` with `δ̄_2(ε) ∘ δ̄_0(ε)` over `R^PD(2)`.
pub fn check_cocycle(s: &Stratification) -> Result<CocycleReport> {
    let l1 = &s.level1;
    let l2 = PDLevel::new(&l1.base, l1.n, 2, l1.w)?;
    let push = |k: u32| -> Result<FreeModuleMap> {
        let f = simplex_pushforward(&SimplexMap::coface(2, k), l1, &l2)?;
        s.eps.map_entries(&f)
    };
    let lhs = push(1)?;
    let rhs = push(2)?.compose(&push(0)?)?;
    let mut witness = None;
    'outer: for a in 0..s.rank() {
        for b in 0..s.rank() {
            let (x, y) = (lhs.entry(a, b), rhs.entry(a, b));
            if x == y {
                continue;
            }
            for i in 0..l2.alg.dim() {
                if x.coeff(i) != y.coeff(i) {
                    witness = Some((a, b, l2.alg.monomial_name(i), x.coeff(i), y.coeff(i)));
                    break 'outer;
                }
            }
        }
    }
    Ok(CocycleReport {
        weight_zero_identity: s.weight_zero_is_identity(),
        witness,
    })
}

/// Does every coefficient satisfy `Θ_m = θ^m` for the extracted `θ`?
pub fn semigroup_law_holds(s: &Stratification) -> Result<bool> {
    let coeffs = s.coefficients();
    let n = s.level1.n as usize;
    let base = &s.level1.base;
    let thetas: Vec<FreeModuleMap> = (0..n)
        .map(|i| {
            let mut e = vec![0u32; n];
            e[i] = 1;
            coeffs
                .get(&e)
                .cloned()
                .unwrap_or_else(|| FreeModuleMap::zeros(base, s.rank(), s.rank()))
        })
        .collect();
    let h = HiggsModule::new(base, s.rank(), thetas, 0)?;
    let zero = FreeModuleMap::zeros(base, s.rank(), s.rank());
    for m in multi_indices(n, s.level1.w.saturating_sub(1)) {
        let got = coeffs.get(&m).unwrap_or(&zero);
        if *got != h.theta_power(&m) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_poly_algebra, GeneratorSpec};
    use crate::coefficients::Modulus;

    fn f5t3() -> Arc<TruncatedAlgebra> {
        make_poly_algebra(
            Modulus::new(5, 1).unwrap(),
            &[GeneratorSpec::polynomial("T", 3)],
        )
        .unwrap()
    }

    fn t_module(a: &Arc<TruncatedAlgebra>) -> HiggsModule {
        let t = FreeModuleMap::from_entries(a, 1, 1, &[a.generator(0)]).unwrap();
        HiggsModule::certified(a, 1, vec![t], 0, 8).unwrap()
    }

    #[test]
    fn cofaces_match_table() {
        let a = f5t3();
        let l1 = PDLevel::new(&a, 1, 1, 3).unwrap();
        let l2 = PDLevel::new(&a, 1, 2, 3).unwrap();
        let x = l1.algebra().generator(l1.xi_index(1, 1));
        let (x1, x2) = (
            l2.algebra().generator(l2.xi_index(1, 1)),
            l2.algebra().generator(l2.xi_index(1, 2)),
        );
        let im = |k| simplex_pushforward(&SimplexMap::coface(2, k), &l1, &l2).unwrap().apply(&x);
        assert_eq!(im(0), x2);
        assert_eq!(im(1), x1.add(&x2));
        assert_eq!(im(2), x1);
        let l0 = PDLevel::new(&a, 1, 0, 3).unwrap();
        let s = simplex_pushforward(&SimplexMap::codegeneracy(0, 0), &l1, &l0).unwrap();
        assert!(s.apply(&x).is_zero());
    }

    #[test]
    fn epsilon_examples() {
        let a = f5t3();
        let h = t_module(&a);
        let s = epsilon_from_theta(&h, 3).unwrap();
        assert_eq!(s.coefficients().len(), 3);
        assert!(epsilon_from_theta(&h, 2).is_err());
        let back = theta_from_epsilon(&s, 0).unwrap();
        assert_eq!(back.theta(0), h.theta(0));
        epsilon_inverse(&s).unwrap();
        assert!(check_cocycle(&s).unwrap().passed());
        assert!(semigroup_law_holds(&s).unwrap());

        let z = HiggsModule::trivial(&a, 2, 1);
        let s = epsilon_from_theta(&z, 1).unwrap();
        assert_eq!(s.eps, FreeModuleMap::identity(s.level1.algebra(), 2));
    }

    #[test]
    fn square_zero_two_terms() {
        let a = make_poly_algebra(Modulus::new(3, 2).unwrap(), &[]).unwrap();
        let th = FreeModuleMap::from_entries(
            &a,
            2,
            2,
            &[a.constant(0), a.constant(3), a.constant(0), a.constant(0)],
        )
        .unwrap();
        let h = HiggsModule::certified(&a, 2, vec![th.clone()], 0, 8).unwrap();
        let s = epsilon_from_theta(&h, 2).unwrap();
        let l = &s.level1;
        let xi = l.algebra().generator(l.xi_index(1, 1));
        let expect = FreeModuleMap::identity(l.algebra(), 2)
            .add(&th.map_entries(&l.inclusion()).unwrap().scale_by(&xi))
            .unwrap();
        assert_eq!(s.eps, expect);
        let inv = epsilon_inverse(&s).unwrap();
        let expect = FreeModuleMap::identity(l.algebra(), 2)
            .sub(&th.map_entries(&l.inclusion()).unwrap().scale_by(&xi))
            .unwrap();
        assert_eq!(inv, expect);
    }

    #[test]
    fn perturbed_cocycle_has_witness() {
        let a = f5t3();
        let h = t_module(&a);
        let s = epsilon_from_theta(&h, 3).unwrap();
        let l = s.level1.clone();
        let bump = l.algebra().monomial(&l.xi_exponents(1, &[2]), 1);
        let eps = s.eps.add(&FreeModuleMap::from_entries(l.algebra(), 1, 1, &[bump]).unwrap()).unwrap();
        let bad = Stratification::new(l, eps).unwrap();
        theta_from_epsilon(&bad, 0).unwrap();
        let rep = check_cocycle(&bad).unwrap();
        let (_, _, mono, _, _) = rep.witness.expect("cocycle must fail");
        assert_eq!(mono, "xi1_1[1]*xi1_2[1]");
        assert!(!semigroup_law_holds(&bad).unwrap());
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(1, 3).len(), 4);
        assert_eq!(multi_indices(0, 3).len(), 1);
    }
}
