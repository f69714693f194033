//! Higgs modules: a free module with commuting nilpotent endomorphisms
//! `θ_1, …, θ_n`, and the associated de Rham complexes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::algebra::{same_algebra, FreeModuleMap, RingMap, TruncatedAlgebra};
use crate::complexes::{subsets, ChainMap, Complex};
use crate::{Error, Result};

/// Default search bound for the nilpotency certificate.
pub const DEFAULT_NIL_BOUND: u32 = 64;

#[derive(Clone, Debug)]
pub struct HiggsModule {
    alg: Arc<TruncatedAlgebra>,
    rank: usize,
    thetas: Vec<FreeModuleMap>,
    twist: i32,
    w_theta: Option<u32>,
}

/// Result of [`check_higgs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiggsReport {
    /// First pair `(i, j)` (0-based) with `θ_i θ_j != θ_j θ_i`.
    pub commutator: Option<(usize, usize)>,
    /// Smallest `W` such that every product of more than `W` factors vanishes.
    pub w_theta: Option<u32>,
    pub bound: u32,
}

impl HiggsReport {
    pub fn valid(&self) -> bool {
        self.commutator.is_none() && self.w_theta.is_some()
    }

    fn into_error(self) -> Error {
        match self.commutator {
            Some((i, j)) => Error::Invalid(format!(
                "theta_{} and theta_{} do not commute",
                i + 1,
                j + 1
            )),
            None => Error::Invalid(format!(
                "theta is not nilpotent within bound {}",
                self.bound
            )),
        }
    }
}

impl HiggsModule {
    /// Shape checks only; see [`HiggsModule::certified`].
    pub fn new(
        alg: &Arc<TruncatedAlgebra>,
        rank: usize,
        thetas: Vec<FreeModuleMap>,
        twist: i32,
    ) -> Result<Self> {
        for (i, t) in thetas.iter().enumerate() {
            if !same_algebra(t.algebra(), alg) {
                return Err(Error::Invalid(format!("theta_{} over the wrong algebra", i + 1)));
            }
            if t.rows() != rank || t.cols() != rank {
                return Err(Error::Shape(format!(
                    "theta_{} is {}x{}, expected {rank}x{rank}",
                    i + 1,
                    t.rows(),
                    t.cols()
                )));
            }
        }
        Ok(HiggsModule {
            alg: alg.clone(),
            rank,
            thetas,
            twist,
            w_theta: None,
        })
    }

    /// Builds and certifies, failing if the report is not valid.
    pub fn certified(
        alg: &Arc<TruncatedAlgebra>,
        rank: usize,
        thetas: Vec<FreeModuleMap>,
        twist: i32,
        bound: u32,
    ) -> Result<Self> {
        Self::new(alg, rank, thetas, twist)?.certify(bound)
    }

    pub fn certify(mut self, bound: u32) -> Result<Self> {
        let rep = check_higgs(&self, bound);
        if !rep.valid() {
            return Err(rep.into_error());
        }
        self.w_theta = rep.w_theta;
        Ok(self)
    }

    /// The trivial module `R^rank` with `θ = 0` in `n` directions.
    pub fn trivial(alg: &Arc<TruncatedAlgebra>, rank: usize, n: usize) -> Self {
        HiggsModule {
            alg: alg.clone(),
            rank,
            thetas: vec![FreeModuleMap::zeros(alg, rank, rank); n],
            twist: 0,
            w_theta: Some(0),
        }
    }

    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of directions `n`.
    pub fn n(&self) -> usize {
        self.thetas.len()
    }

    pub fn theta(&self, i: usize) -> &FreeModuleMap {
        &self.thetas[i]
    }

    pub fn thetas(&self) -> &[FreeModuleMap] {
        &self.thetas
    }

    pub fn twist_tag(&self) -> i32 {
        self.twist
    }

    pub fn w_theta(&self) -> Option<u32> {
        self.w_theta
    }

    /// `θ^m = Π θ_i^{m_i}`.
    pub fn theta_power(&self, m: &[u32]) -> FreeModuleMap {
        let mut out = FreeModuleMap::identity(&self.alg, self.rank);
        for (i, &e) in m.iter().enumerate() {
            for _ in 0..e {
                out = self.thetas[i].compose(&out).expect("square matrices");
            }
        }
        out
    }

    fn with_thetas(&self, rank: usize, thetas: Vec<FreeModuleMap>, twist: i32) -> Self {
        HiggsModule {
            alg: self.alg.clone(),
            rank,
            thetas,
            twist,
            w_theta: None,
        }
    }

    fn recertify(mut self) -> Self {
        let rep = check_higgs(&self, DEFAULT_NIL_BOUND);
        if rep.valid() {
            self.w_theta = rep.w_theta;
        }
        self
    }
}

/// Checks commutativity and searches for the nilpotency certificate.
pub fn check_higgs(h: &HiggsModule, bound: u32) -> HiggsReport {
    let n = h.n();
    let mut commutator = None;
    'outer: for i in 0..n {
        for j in i + 1..n {
            let a = h.thetas[i].compose(&h.thetas[j]).expect("square");
            let b = h.thetas[j].compose(&h.thetas[i]).expect("square");
            if a != b {
                commutator = Some((i, j));
                break 'outer;
            }
        }
    }
    let mut w_theta = None;
    if commutator.is_none() {
        // Words of length k, as monomials: (last factor index, product).
        let mut level: Vec<(usize, FreeModuleMap)> =
            vec![(0, FreeModuleMap::identity(&h.alg, h.rank))];
        for k in 1..=bound + 1 {
            let mut next = Vec::new();
            for (last, x) in &level {
                for i in *last..n {
                    let y = h.thetas[i].compose(x).expect("square");
                    if !y.is_zero() {
                        next.push((i, y));
                    }
                }
            }
            if next.is_empty() {
                w_theta = Some(k - 1);
                break;
            }
            level = next;
        }
    }
    HiggsReport {
        commutator,
        w_theta,
        bound,
    }
}

/// Position of each `j`-subset of `0..n` in the lexicographic listing.
fn subset_index(n: usize, j: usize) -> BTreeMap<Vec<usize>, usize> {
    subsets(n, j).into_iter().enumerate().map(|(k, s)| (s, k)).collect()
}

/// The de Rham complex `M -> M⊗Ω^1 -> … -> M⊗Ω^n`. Degree `j` has basis
/// `subset_index * rank + module_index`.
pub fn dr_complex(h: &HiggsModule) -> Result<Complex> {
    let n = h.n();
    let r = h.rank;
    let ranks: Vec<usize> = (0..=n).map(|j| binom(n, j) * r).collect();
    let mut diffs = Vec::new();
    for j in 0..n {
        let src = subsets(n, j);
        let dst = subset_index(n, j + 1);
        let mut d = FreeModuleMap::zeros(&h.alg, ranks[j + 1], ranks[j]);
        for (col, s) in src.iter().enumerate() {
            let members: BTreeSet<usize> = s.iter().copied().collect();
            for i in 0..n {
                if members.contains(&i) {
                    continue;
                }
                let smaller = s.iter().filter(|&&x| x < i).count();
                let mut t = s.clone();
                t.push(i);
                t.sort_unstable();
                let row = dst[&t];
                let block = if smaller % 2 == 0 {
                    h.thetas[i].clone()
                } else {
                    h.thetas[i].neg()
                };
                d.set_block(row * r, col * r, &block);
            }
        }
        diffs.push(d);
    }
    Complex::new(&h.alg, 0, ranks, diffs)
}

/// Twist tag carried by degree `j` of the de Rham complex.
pub fn dr_twist(h: &HiggsModule, j: i32) -> i32 {
    h.twist - j
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `θ_i^∨ = -θ_i^T`; the twist tag is negated.
pub fn dual(h: &HiggsModule) -> HiggsModule {
    let th = h.thetas.iter().map(|t| t.transpose().neg()).collect();
    let mut out = h.with_thetas(h.rank, th, -h.twist);
    out.w_theta = h.w_theta;
    out
}

pub fn twist(h: &HiggsModule, i: i32) -> HiggsModule {
    let mut out = h.clone();
    out.twist += i;
    out
}

fn check_pair(a: &HiggsModule, b: &HiggsModule) -> Result<()> {
    if !same_algebra(&a.alg, &b.alg) {
        return Err(Error::Invalid("Higgs modules over different rings".into()));
    }
    if a.n() != b.n() {
        return Err(Error::Invalid(format!(
            "Higgs modules with {} and {} directions",
            a.n(),
            b.n()
        )));
    }
    Ok(())
}

/// `θ_i = θ_{1,i} ⊗ 1 + 1 ⊗ θ_{2,i}`, basis `a * r2 + b`.
pub fn tensor(a: &HiggsModule, b: &HiggsModule) -> Result<HiggsModule> {
    check_pair(a, b)?;
    let ia = FreeModuleMap::identity(&a.alg, a.rank);
    let ib = FreeModuleMap::identity(&a.alg, b.rank);
    let mut th = Vec::new();
    for i in 0..a.n() {
        th.push(a.thetas[i].kron(&ib)?.add(&ia.kron(&b.thetas[i])?)?);
    }
    Ok(a.with_thetas(a.rank * b.rank, th, a.twist + b.twist).recertify())
}

/// `θ_i(f) = θ_{2,i} ∘ f - f ∘ θ_{1,i}` on `f : M_1 -> M_2`, stored as a
/// row-major `r2 x r1` matrix.
pub fn hom(a: &HiggsModule, b: &HiggsModule) -> Result<HiggsModule> {
    check_pair(a, b)?;
    let ia = FreeModuleMap::identity(&a.alg, a.rank);
    let ib = FreeModuleMap::identity(&a.alg, b.rank);
    let mut th = Vec::new();
    for i in 0..a.n() {
        let left = b.thetas[i].kron(&ia)?;
        let right = ib.kron(&a.thetas[i].transpose())?;
        th.push(left.sub(&right)?);
    }
    Ok(a.with_thetas(a.rank * b.rank, th, b.twist - a.twist).recertify())
}

/// Base change along a ring map, with the comparison `DR(H) ⊗ R' -> DR(H')`
/// certified to be an isomorphism of complexes.
pub fn base_change(h: &HiggsModule, f: &RingMap) -> Result<(HiggsModule, ChainMap)> {
    if !same_algebra(f.source(), &h.alg) {
        return Err(Error::Invalid("ring map source is not the base ring".into()));
    }
    let th = h
        .thetas
        .iter()
        .map(|t| t.map_entries(f))
        .collect::<Result<Vec<_>>>()?;
    let h2 = HiggsModule::new(f.target(), h.rank, th, h.twist)?.recertify();
    let dr = dr_complex(h)?;
    let pulled = dr.map_entries(f)?;
    let dr2 = dr_complex(&h2)?;
    let maps = dr2
        .degrees()
        .map(|j| (j, FreeModuleMap::identity(f.target(), dr2.rank(j))))
        .collect();
    let cmp = ChainMap::new(&pulled, &dr2, maps)?;
    if !cmp.is_bijective() {
        return Err(Error::Verification("base change comparison is not bijective".into()));
    }
    Ok((h2, cmp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_poly_algebra, GeneratorSpec};
    use crate::coefficients::Modulus;

    fn f5t(cap: u32) -> Arc<TruncatedAlgebra> {
        make_poly_algebra(
            Modulus::new(5, 1).unwrap(),
            &[GeneratorSpec::polynomial("T", cap)],
        )
        .unwrap()
    }

    fn rank1(alg: &Arc<TruncatedAlgebra>, e: &crate::algebra::AlgebraElement) -> FreeModuleMap {
        FreeModuleMap::from_entries(alg, 1, 1, &[e.clone()]).unwrap()
    }

    #[test]
    fn check_examples() {
        let a = f5t(3);
        let z = HiggsModule::trivial(&a, 1, 1);
        assert_eq!(check_higgs(&z, 8).w_theta, Some(0));
        let h = HiggsModule::new(&a, 1, vec![rank1(&a, &a.generator(0))], 0).unwrap();
        assert_eq!(check_higgs(&h, 8).w_theta, Some(2));

        let b = make_poly_algebra(Modulus::new(5, 1).unwrap(), &[]).unwrap();
        let e = |v: [i64; 4]| {
            FreeModuleMap::from_entries(&b, 2, 2, &v.map(|x| b.constant(x))).unwrap()
        };
        let h = HiggsModule::new(&b, 2, vec![e([0, 1, 0, 0]), e([0, 0, 1, 0])], 0).unwrap();
        let rep = check_higgs(&h, 8);
        assert_eq!(rep.commutator, Some((0, 1)));
        assert!(!rep.valid());
        // Unit entries never become nilpotent.
        let h = HiggsModule::new(&b, 1, vec![rank1(&b, &b.constant(1))], 0).unwrap();
        assert_eq!(check_higgs(&h, 8).w_theta, None);
    }

    #[test]
    fn dr_examples() {
        let a = f5t(3);
        let z = HiggsModule::trivial(&a, 1, 1);
        let h = dr_complex(&z).unwrap().cohomology();
        assert_eq!(h[&0].exponents(), &[1, 1, 1]);
        assert_eq!(h[&1].exponents(), &[1, 1, 1]);

        let t = HiggsModule::certified(&a, 1, vec![rank1(&a, &a.generator(0))], 0, 8).unwrap();
        let h = dr_complex(&t).unwrap().cohomology();
        assert_eq!(h[&0].exponents(), &[1]);
        assert_eq!(h[&1].exponents(), &[1]);
    }

    #[test]
    fn dr_two_variables_matches_koszul() {
        let a = make_poly_algebra(
            Modulus::new(5, 1).unwrap(),
            &[
                GeneratorSpec::polynomial("T1", 2),
                GeneratorSpec::polynomial("T2", 2),
            ],
        )
        .unwrap();
        let th = vec![rank1(&a, &a.generator(0)), rank1(&a, &a.generator(1))];
        let h = HiggsModule::certified(&a, 1, th, 0, 8).unwrap();
        let dr = dr_complex(&h).unwrap();
        let kos = crate::complexes::koszul(&a, &[a.generator(0), a.generator(1)]).unwrap();
        let (c1, c2) = (dr.cohomology(), kos.cohomology());
        for j in 0..=2 {
            assert_eq!(c1[&j], c2[&(j - 2)]);
        }
        // H^0 = T1 T2 R has length 1; H^2 = R/(T1, T2) has length 1; H^1 length 2.
        assert_eq!(c1[&0].length(), 1);
        assert_eq!(c1[&1].length(), 2);
        assert_eq!(c1[&2].length(), 1);
    }

    #[test]
    fn dual_twist_tensor_hom() {
        let a = f5t(3);
        let t = a.generator(0);
        let h = HiggsModule::certified(&a, 1, vec![rank1(&a, &t)], 2, 8).unwrap();
        let d = dual(&h);
        assert_eq!(d.theta(0).entry(0, 0), t.neg());
        assert_eq!(dual(&d).theta(0), h.theta(0));
        assert_eq!(twist(&twist(&h, 1), 1).twist_tag(), twist(&h, 2).twist_tag());

        let g = HiggsModule::certified(&a, 1, vec![rank1(&a, &t.pow(2).scale(3))], 1, 8).unwrap();
        let s = tensor(&h, &g).unwrap();
        assert_eq!(s.theta(0).entry(0, 0), t.add(&t.pow(2).scale(3)));
        assert_eq!(s.twist_tag(), 3);
        assert!(s.w_theta().unwrap() <= h.w_theta().unwrap() + g.w_theta().unwrap());
        let m = hom(&h, &g).unwrap();
        assert_eq!(m.theta(0).entry(0, 0), t.pow(2).scale(3).sub(&t));

        let triv = HiggsModule::trivial(&a, 1, 1);
        assert_eq!(tensor(&h, &triv).unwrap().theta(0), h.theta(0));
        assert_eq!(hom(&triv, &h).unwrap().theta(0), h.theta(0));
        assert_eq!(hom(&h, &triv).unwrap().theta(0), d.theta(0));
    }

    #[test]
    fn base_change_examples() {
        let a = f5t(3);
        let t = a.generator(0);
        let h = HiggsModule::certified(&a, 1, vec![rank1(&a, &t)], 0, 8).unwrap();
        let (h1, c) = base_change(&h, &RingMap::identity(&a)).unwrap();
        assert_eq!(h1.theta(0), h.theta(0));
        assert!(c.is_bijective());

        let pt = make_poly_algebra(Modulus::new(5, 1).unwrap(), &[]).unwrap();
        let f = RingMap::from_generator_images(&a, &pt, vec![pt.zero()]).unwrap();
        let (h2, _) = base_change(&h, &f).unwrap();
        assert!(h2.theta(0).is_zero());

        let b = f5t(2);
        let f = RingMap::from_generator_images(&a, &b, vec![b.generator(0)]).unwrap();
        let (h3, _) = base_change(&h, &f).unwrap();
        assert_eq!(h3.w_theta(), Some(1));
    }
}
