//! Bounded cochain complexes of finite free modules over a truncated algebra.
//!
//! Degrees are `i32`; a complex stores the ranks for `lo..=hi` and the
//! differentials `d^i : K^i -> K^{i+1}` for `lo <= i < hi`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{same_algebra, AlgebraElement, FreeModuleMap, TruncatedAlgebra};
use crate::coefficients::{
    homology_unchecked, image_contains, image_length, kernel_generators, ElementaryDivisors, ScalarMatrix,
};
use crate::{Error, Result};

fn sign(e: i32) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug)]
pub struct Complex {
    alg: Arc<TruncatedAlgebra>,
    lo: i32,
    ranks: Vec<usize>,
    diffs: Vec<FreeModuleMap>,
    weights: Option<Vec<Vec<u32>>>,
}

impl Complex {
    /// Checks shapes and `d∘d = 0`.
    pub fn new(
        alg: &Arc<TruncatedAlgebra>,
        lo: i32,
        ranks: Vec<usize>,
        diffs: Vec<FreeModuleMap>,
    ) -> Result<Self> {
        let c = Complex {
            alg: alg.clone(),
            lo,
            ranks,
            diffs,
            weights: None,
        };
        c.validate()?;
        Ok(c)
    }

    /// Same as [`Complex::new`] without the `d∘d` check, for complexes that
    /// are correct by construction and too large to square cheaply.
    pub(crate) fn new_unchecked(
        alg: &Arc<TruncatedAlgebra>,
        lo: i32,
        ranks: Vec<usize>,
        diffs: Vec<FreeModuleMap>,
    ) -> Self {
        Complex {
            alg: alg.clone(),
            lo,
            ranks,
            diffs,
            weights: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ranks.is_empty() {
            return Err(Error::Shape("complex needs at least one degree".into()));
        }
        if self.diffs.len() + 1 != self.ranks.len() {
            return Err(Error::Shape(format!(
                "{} ranks but {} differentials",
                self.ranks.len(),
                self.diffs.len()
            )));
        }
        for (k, d) in self.diffs.iter().enumerate() {
            if !same_algebra(d.algebra(), &self.alg) {
                return Err(Error::Invalid("differential over the wrong algebra".into()));
            }
            if d.cols() != self.ranks[k] || d.rows() != self.ranks[k + 1] {
                return Err(Error::Shape(format!(
                    "d^{} is {}x{}, expected {}x{}",
                    self.lo + k as i32,
                    d.rows(),
                    d.cols(),
                    self.ranks[k + 1],
                    self.ranks[k]
                )));
            }
        }
        for k in 1..self.diffs.len() {
            if !self.diffs[k].compose(&self.diffs[k - 1])?.is_zero() {
                return Err(Error::NotComplex);
            }
        }
        Ok(())
    }

    /// A single free module of rank `rank` placed in degree `deg`.
    pub fn concentrated(alg: &Arc<TruncatedAlgebra>, rank: usize, deg: i32) -> Self {
        Complex::new_unchecked(alg, deg, vec![rank], vec![])
    }

    /// Attaches a weight to every basis vector of every degree.
    pub fn with_weights(mut self, weights: Vec<Vec<u32>>) -> Result<Self> {
        if weights.len() != self.ranks.len()
            || weights.iter().zip(&self.ranks).any(|(w, &r)| w.len() != r)
        {
            return Err(Error::Shape("weight vector does not match ranks".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn weights(&self, deg: i32) -> Option<&[u32]> {
        let w = self.weights.as_ref()?;
        self.slot(deg).map(|k| w[k].as_slice())
    }

    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.ranks.len() as i32 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi()
    }

    fn slot(&self, deg: i32) -> Option<usize> {
        if deg < self.lo || deg > self.hi() {
            None
        } else {
            Some((deg - self.lo) as usize)
        }
    }

    pub fn rank(&self, deg: i32) -> usize {
        self.slot(deg).map_or(0, |k| self.ranks[k])
    }

    /// `d^deg`, the zero map outside the stored range.
    pub fn diff(&self, deg: i32) -> FreeModuleMap {
        match self.slot(deg) {
            Some(k) if k < self.diffs.len() => self.diffs[k].clone(),
            _ => FreeModuleMap::zeros(&self.alg, self.rank(deg + 1), self.rank(deg)),
        }
    }

    pub fn diff_ref(&self, deg: i32) -> Option<&FreeModuleMap> {
        self.slot(deg).and_then(|k| self.diffs.get(k))
    }

    /// `K[n]`: degree `i` holds `K^{i+n}` with differential `(-1)^n d^{i+n}`.
    pub fn shift(&self, n: i32) -> Complex {
        let s = sign(n);
        Complex {
            alg: self.alg.clone(),
            lo: self.lo - n,
            ranks: self.ranks.clone(),
            diffs: self.diffs.iter().map(|d| d.scale(s)).collect(),
            weights: self.weights.clone(),
        }
    }

    /// `K ⊗_R R'` along a ring map.
    pub fn map_entries(&self, f: &crate::algebra::RingMap) -> Result<Complex> {
        let diffs = self
            .diffs
            .iter()
            .map(|d| d.map_entries(f))
            .collect::<Result<Vec<_>>>()?;
        Complex::new(f.target(), self.lo, self.ranks.clone(), diffs)
    }

    /// Is every module free of rank zero outside `[a, b]`?
    pub fn concentrated_in(&self, a: i32, b: i32) -> bool {
        self.degrees().all(|i| (a..=b).contains(&i) || self.rank(i) == 0)
    }

    /// Cohomology of the underlying `Z/p^N`-complex, one entry per degree.
    pub fn cohomology(&self) -> BTreeMap<i32, ElementaryDivisors> {
        self.cohomology_in(self.lo, self.hi())
    }

    /// Cohomology in degrees `a..=b` only.
    pub fn cohomology_in(&self, a: i32, b: i32) -> BTreeMap<i32, ElementaryDivisors> {
        let degs: Vec<i32> = (a.max(self.lo)..=b.min(self.hi())).collect();
        let out = crate::par::map(&degs, |&i| {
            let d_in = self.diff(i - 1).restrict_scalars();
            let d_out = self.diff(i).restrict_scalars();
            (i, homology_unchecked(&d_in, &d_out).expect("complex was validated"))
        });
        out.into_iter().collect()
    }

    /// `Z/p^N`-length of `H^deg`, from image lengths only.
    pub fn cohomology_length(&self, deg: i32) -> u64 {
        let n = self.alg.modulus().precision() as u64;
        let dim = (self.rank(deg) * self.alg.dim()) as u64;
        let a = image_length(&self.diff(deg - 1).restrict_scalars());
        let b = image_length(&self.diff(deg).restrict_scalars());
        n * dim - a - b
    }

    /// Is every cycle of degree `deg` supported on basis vectors accepted by
    /// `keep` (scalar index, i.e. `rank_index * dim + basis_index`) a boundary?
    pub fn cycles_in_window_are_boundaries<F>(&self, deg: i32, keep: F) -> bool
    where
        F: Fn(usize) -> bool,
    {
        let d_out = self.diff(deg).restrict_scalars();
        let cols: Vec<usize> = (0..d_out.cols()).filter(|&c| keep(c)).collect();
        if cols.is_empty() {
            return true;
        }
        let sub = d_out.select_cols(&cols);
        let kg = kernel_generators(&sub);
        let mut full = ScalarMatrix::zeros(d_out.cols(), kg.cols(), d_out.modulus());
        for (r, &c) in cols.iter().enumerate() {
            for k in 0..kg.cols() {
                full.set(c, k, kg.get(r, k));
            }
        }
        let d_in = self.diff(deg - 1).restrict_scalars();
        image_contains(&d_in, &full).expect("shapes agree")
    }
}

fn check_same_alg(a: &Complex, b: &Complex) -> Result<()> {
    if same_algebra(&a.alg, &b.alg) {
        Ok(())
    } else {
        Err(Error::Invalid("complexes over different algebras".into()))
    }
}

/// `K ⊗ L` with `d(x ⊗ y) = dx ⊗ y + (-1)^i x ⊗ dy` for `x` in degree `i`.
///
/// Degree `n` is the sum over `i` ascending of `K^i ⊗ L^{n-i}`, with basis
/// `a * rank(L^{n-i}) + b`.
pub fn tensor(k: &Complex, l: &Complex) -> Result<Complex> {
    check_same_alg(k, l)?;
    let alg = &k.alg;
    let lo = k.lo + l.lo;
    let hi = k.hi() + l.hi();
    let layout = |n: i32| -> Vec<(i32, usize)> {
        let mut off = 0;
        let mut v = Vec::new();
        for i in k.degrees() {
            let j = n - i;
            if j < l.lo || j > l.hi() {
                continue;
            }
            v.push((i, off));
            off += k.rank(i) * l.rank(j);
        }
        v
    };
    let total = |n: i32| -> usize { (k.degrees()).map(|i| k.rank(i) * l.rank(n - i)).sum() };
    let ranks: Vec<usize> = (lo..=hi).map(total).collect();
    let mut diffs = Vec::new();
    for n in lo..hi {
        let src = layout(n);
        let dst: BTreeMap<i32, usize> = layout(n + 1).into_iter().collect();
        let mut d = FreeModuleMap::zeros(alg, total(n + 1), total(n));
        for &(i, off) in &src {
            let j = n - i;
            if let Some(&t) = dst.get(&(i + 1)) {
                let b = k.diff(i).kron(&FreeModuleMap::identity(alg, l.rank(j)))?;
                d.set_block(t, off, &b);
            }
            if let Some(&t) = dst.get(&i) {
                let b = FreeModuleMap::identity(alg, k.rank(i))
                    .kron(&l.diff(j))?
                    .scale(sign(i));
                d.set_block(t, off, &b);
            }
        }
        diffs.push(d);
    }
    Complex::new(alg, lo, ranks, diffs)
}

/// Layout of `Hom^n(K, L) = Π_p Hom(K^p, L^{p+n})`: ascending `p`, each factor
/// stored as a row-major `rank(L^{p+n}) x rank(K^p)` matrix.
pub fn hom_layout(k: &Complex, l: &Complex, n: i32) -> Vec<(i32, usize)> {
    let mut off = 0;
    let mut v = Vec::new();
    for p in k.degrees() {
        if p + n < l.lo || p + n > l.hi() {
            continue;
        }
        v.push((p, off));
        off += k.rank(p) * l.rank(p + n);
    }
    v
}

/// The internal Hom complex with `d(f) = d_L ∘ f - (-1)^n f ∘ d_K`.
pub fn hom_complex(k: &Complex, l: &Complex) -> Result<Complex> {
    check_same_alg(k, l)?;
    let alg = &k.alg;
    let lo = l.lo - k.hi();
    let hi = l.hi() - k.lo;
    let total = |n: i32| -> usize { k.degrees().map(|p| k.rank(p) * l.rank(p + n)).sum() };
    let ranks: Vec<usize> = (lo..=hi).map(total).collect();
    let mut diffs = Vec::new();
    for n in lo..hi {
        let src: BTreeMap<i32, usize> = hom_layout(k, l, n).into_iter().collect();
        let dst = hom_layout(k, l, n + 1);
        let mut d = FreeModuleMap::zeros(alg, total(n + 1), total(n));
        for &(p, t) in &dst {
            // (df)_p = d_L^{p+n} f_p - (-1)^n f_{p+1} d_K^p
            if let Some(&s) = src.get(&p) {
                let b = l
                    .diff(p + n)
                    .kron(&FreeModuleMap::identity(alg, k.rank(p)))?;
                d.set_block(t, s, &b);
            }
            if let Some(&s) = src.get(&(p + 1)) {
                let b = FreeModuleMap::identity(alg, l.rank(p + n + 1))
                    .kron(&k.diff(p).transpose())?
                    .scale(-sign(n));
                d.set_block(t, s, &b);
            }
        }
        diffs.push(d);
    }
    Complex::new(alg, lo, ranks, diffs)
}

/// A family of maps `f^i : K^i -> L^{i+deg}`.
#[derive(Clone, Debug)]
pub struct GradedMap {
    pub source: Complex,
    pub target: Complex,
    pub degree: i32,
    maps: BTreeMap<i32, FreeModuleMap>,
}

impl GradedMap {
    pub fn new(
        source: &Complex,
        target: &Complex,
        degree: i32,
        maps: BTreeMap<i32, FreeModuleMap>,
    ) -> Result<Self> {
        check_same_alg(source, target)?;
        for (&i, f) in &maps {
            if f.cols() != source.rank(i) || f.rows() != target.rank(i + degree) {
                return Err(Error::Shape(format!("component {i} has the wrong shape")));
            }
        }
        Ok(GradedMap {
            source: source.clone(),
            target: target.clone(),
            degree,
            maps,
        })
    }

    /// Component in source degree `i` (zero when absent).
    pub fn component(&self, i: i32) -> FreeModuleMap {
        self.maps.get(&i).cloned().unwrap_or_else(|| {
            FreeModuleMap::zeros(
                self.source.algebra(),
                self.target.rank(i + self.degree),
                self.source.rank(i),
            )
        })
    }
}

/// A degree-zero map of complexes.
#[derive(Clone, Debug)]
pub struct ChainMap(pub GradedMap);

impl ChainMap {
    /// Checks `d_L f^i = f^{i+1} d_K` in every degree.
    pub fn new(
        source: &Complex,
        target: &Complex,
        maps: BTreeMap<i32, FreeModuleMap>,
    ) -> Result<Self> {
        let g = GradedMap::new(source, target, 0, maps)?;
        let lo = source.lo.min(target.lo) - 1;
        let hi = source.hi().max(target.hi());
        for i in lo..=hi {
            let a = target.diff(i).compose(&g.component(i))?;
            let b = g.component(i + 1).compose(&source.diff(i))?;
            if a != b {
                return Err(Error::Verification(format!(
                    "map fails to commute with the differentials in degree {i}"
                )));
            }
        }
        Ok(ChainMap(g))
    }

    pub fn identity(k: &Complex) -> Self {
        let maps = k
            .degrees()
            .map(|i| (i, FreeModuleMap::identity(&k.alg, k.rank(i))))
            .collect();
        ChainMap(GradedMap::new(k, k, 0, maps).expect("shapes agree"))
    }

    pub fn source(&self) -> &Complex {
        &self.0.source
    }

    pub fn target(&self) -> &Complex {
        &self.0.target
    }

    pub fn component(&self, i: i32) -> FreeModuleMap {
        self.0.component(i)
    }

    /// Is every component an isomorphism of underlying `Z/p^N`-modules?
    pub fn is_bijective(&self) -> bool {
        let lo = self.source().lo.min(self.target().lo);
        let hi = self.source().hi().max(self.target().hi());
        (lo..=hi).all(|i| {
            let f = self.component(i).restrict_scalars();
            if f.rows() != f.cols() {
                return false;
            }
            crate::coefficients::image_length(&f)
                == f.rows() as u64 * f.modulus().precision() as u64
        })
    }
}

/// `cone(f)^n = K^{n+1} ⊕ L^n`, `d(k, l) = (-d_K k, f(k) + d_L l)`.
pub fn cone(f: &ChainMap) -> Result<Complex> {
    let k = f.source();
    let l = f.target();
    let alg = k.algebra();
    let lo = (k.lo - 1).min(l.lo);
    let hi = (k.hi() - 1).max(l.hi());
    let ranks: Vec<usize> = (lo..=hi).map(|n| k.rank(n + 1) + l.rank(n)).collect();
    let mut diffs = Vec::new();
    for n in lo..hi {
        let (ks, ls) = (k.rank(n + 1), l.rank(n));
        let (kt, lt) = (k.rank(n + 2), l.rank(n + 1));
        let mut d = FreeModuleMap::zeros(alg, kt + lt, ks + ls);
        d.set_block(0, 0, &k.diff(n + 1).neg());
        d.set_block(kt, 0, &f.component(n + 1));
        d.set_block(kt, ks, &l.diff(n));
        diffs.push(d);
    }
    // d∘d = 0 follows from the chain map identity checked in ChainMap::new.
    Ok(Complex::new_unchecked(alg, lo, ranks, diffs))
}

/// A bigraded complex with commuting differentials `d1` (raising `i`) and
/// `d2` (raising `j`).
#[derive(Clone, Debug)]
pub struct DoubleComplex {
    alg: Arc<TruncatedAlgebra>,
    ranks: BTreeMap<(i32, i32), usize>,
    d1: BTreeMap<(i32, i32), FreeModuleMap>,
    d2: BTreeMap<(i32, i32), FreeModuleMap>,
}

impl DoubleComplex {
    pub fn new(
        alg: &Arc<TruncatedAlgebra>,
        ranks: BTreeMap<(i32, i32), usize>,
        d1: BTreeMap<(i32, i32), FreeModuleMap>,
        d2: BTreeMap<(i32, i32), FreeModuleMap>,
    ) -> Result<Self> {
        let dc = Self::new_unchecked(alg, ranks, d1, d2)?;
        for &(i, j) in dc.ranks.keys() {
            let a = dc.d1(i + 1, j).compose(&dc.d1(i, j))?;
            let b = dc.d2(i, j + 1).compose(&dc.d2(i, j))?;
            let c = dc.d2(i + 1, j).compose(&dc.d1(i, j))?;
            let e = dc.d1(i, j + 1).compose(&dc.d2(i, j))?;
            if !a.is_zero() || !b.is_zero() {
                return Err(Error::NotComplex);
            }
            if c != e {
                return Err(Error::Verification(format!(
                    "differentials do not commute at ({i}, {j})"
                )));
            }
        }
        Ok(dc)
    }

    /// Shape checks only.
    pub fn new_unchecked(
        alg: &Arc<TruncatedAlgebra>,
        ranks: BTreeMap<(i32, i32), usize>,
        d1: BTreeMap<(i32, i32), FreeModuleMap>,
        d2: BTreeMap<(i32, i32), FreeModuleMap>,
    ) -> Result<Self> {
        let dc = DoubleComplex {
            alg: alg.clone(),
            ranks,
            d1,
            d2,
        };
        let rank = |c: (i32, i32)| dc.ranks.get(&c).copied().unwrap_or(0);
        for (&(i, j), m) in &dc.d1 {
            if m.cols() != rank((i, j)) || m.rows() != rank((i + 1, j)) {
                return Err(Error::Shape(format!("d1 at ({i}, {j}) has the wrong shape")));
            }
        }
        for (&(i, j), m) in &dc.d2 {
            if m.cols() != rank((i, j)) || m.rows() != rank((i, j + 1)) {
                return Err(Error::Shape(format!("d2 at ({i}, {j}) has the wrong shape")));
            }
        }
        Ok(dc)
    }

    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    pub fn rank(&self, i: i32, j: i32) -> usize {
        self.ranks.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.ranks.keys().copied()
    }

    pub fn d1(&self, i: i32, j: i32) -> FreeModuleMap {
        self.d1.get(&(i, j)).cloned().unwrap_or_else(|| {
            FreeModuleMap::zeros(&self.alg, self.rank(i + 1, j), self.rank(i, j))
        })
    }

    pub fn d2(&self, i: i32, j: i32) -> FreeModuleMap {
        self.d2.get(&(i, j)).cloned().unwrap_or_else(|| {
            FreeModuleMap::zeros(&self.alg, self.rank(i, j + 1), self.rank(i, j))
        })
    }

    /// Row `j` as a complex in `i`.
    pub fn row(&self, j: i32) -> Result<Complex> {
        let is: Vec<i32> = self.cells().filter(|c| c.1 == j).map(|c| c.0).collect();
        let (Some(&lo), Some(&hi)) = (is.iter().min(), is.iter().max()) else {
            return Ok(Complex::concentrated(&self.alg, 0, 0));
        };
        let ranks = (lo..=hi).map(|i| self.rank(i, j)).collect();
        let diffs = (lo..hi).map(|i| self.d1(i, j)).collect();
        Ok(Complex::new_unchecked(&self.alg, lo, ranks, diffs))
    }

    /// Column `i` as a complex in `j`.
    pub fn column(&self, i: i32) -> Result<Complex> {
        let js: Vec<i32> = self.cells().filter(|c| c.0 == i).map(|c| c.1).collect();
        let (Some(&lo), Some(&hi)) = (js.iter().min(), js.iter().max()) else {
            return Ok(Complex::concentrated(&self.alg, 0, 0));
        };
        let ranks = (lo..=hi).map(|j| self.rank(i, j)).collect();
        let diffs = (lo..hi).map(|j| self.d2(i, j)).collect();
        Ok(Complex::new_unchecked(&self.alg, lo, ranks, diffs))
    }

    /// Cells of total degree `n`, ascending in `i`, with their offsets.
    pub fn total_layout(&self, n: i32) -> Vec<((i32, i32), usize)> {
        let mut off = 0;
        let mut v = Vec::new();
        for (&(i, j), &r) in &self.ranks {
            if i + j == n {
                v.push(((i, j), off));
                off += r;
            }
        }
        v
    }

    /// Totalization with `d = d1 + (-1)^i d2`.
    pub fn total_complex(&self) -> Result<Complex> {
        let degs: Vec<i32> = self.cells().map(|(i, j)| i + j).collect();
        let (Some(&lo), Some(&hi)) = (degs.iter().min(), degs.iter().max()) else {
            return Ok(Complex::concentrated(&self.alg, 0, 0));
        };
        let total = |n: i32| -> usize {
            self.ranks
                .iter()
                .filter(|(c, _)| c.0 + c.1 == n)
                .map(|(_, &r)| r)
                .sum()
        };
        let ranks: Vec<usize> = (lo..=hi).map(total).collect();
        let ns: Vec<i32> = (lo..hi).collect();
        let diffs = crate::par::map(&ns, |&n| {
            let src = self.total_layout(n);
            let dst: BTreeMap<(i32, i32), usize> = self.total_layout(n + 1).into_iter().collect();
            let mut d = FreeModuleMap::zeros(&self.alg, total(n + 1), total(n));
            for &((i, j), off) in &src {
                if let (Some(&t), Some(m)) = (dst.get(&(i + 1, j)), self.d1.get(&(i, j))) {
                    d.set_block(t, off, m);
                }
                if let (Some(&t), Some(m)) = (dst.get(&(i, j + 1)), self.d2.get(&(i, j))) {
                    d.set_block(t, off, &m.scale(sign(i)));
                }
            }
            d
        });
        Ok(Complex::new_unchecked(&self.alg, lo, ranks, diffs))
    }
}

/// Subsets of `0..r` of size `m`, lexicographic.
pub fn subsets(r: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, r: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for x in start..r {
            if r - x < m - cur.len() {
                break;
            }
            cur.push(x);
            go(x + 1, r, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, r, m, &mut Vec::new(), &mut out);
    out
}

/// Koszul complex of `f_1, ..., f_r` in degrees `[-r, 0]`; degree `-m` has
/// basis the `m`-subsets in lexicographic order.
pub fn koszul(alg: &Arc<TruncatedAlgebra>, f: &[AlgebraElement]) -> Result<Complex> {
    let r = f.len();
    for x in f {
        if !same_algebra(x.algebra(), alg) {
            return Err(Error::Invalid("Koszul element in the wrong algebra".into()));
        }
    }
    let levels: Vec<Vec<Vec<usize>>> = (0..=r).map(|m| subsets(r, m)).collect();
    let ranks: Vec<usize> = (0..=r).rev().map(|m| levels[m].len()).collect();
    let mut diffs = Vec::new();
    for m in (1..=r).rev() {
        let index: BTreeMap<&Vec<usize>, usize> =
            levels[m - 1].iter().enumerate().map(|(k, s)| (s, k)).collect();
        let mut d = FreeModuleMap::zeros(alg, levels[m - 1].len(), levels[m].len());
        for (col, s) in levels[m].iter().enumerate() {
            for (k, &i) in s.iter().enumerate() {
                let mut t = s.clone();
                t.remove(k);
                let e = if k % 2 == 0 { f[i].clone() } else { f[i].neg() };
                d.add_to(index[&t], col, &e);
            }
        }
        diffs.push(d);
    }
    Complex::new(alg, -(r as i32), ranks, diffs)
}

/// `Kos(f^{n+1}) -> Kos(f^n)`, multiplication by `Π_{i∈I} f_i` on `e_I`.
pub fn koszul_transition(
    alg: &Arc<TruncatedAlgebra>,
    f: &[AlgebraElement],
    n: u64,
) -> Result<ChainMap> {
    let r = f.len();
    let pw = |e: u64| -> Vec<AlgebraElement> { f.iter().map(|x| x.pow(e)).collect() };
    let src = koszul(alg, &pw(n + 1))?;
    let tgt = koszul(alg, &pw(n))?;
    let mut maps = BTreeMap::new();
    for m in 0..=r {
        let sets = subsets(r, m);
        let mut t = FreeModuleMap::zeros(alg, sets.len(), sets.len());
        for (k, s) in sets.iter().enumerate() {
            let prod = s.iter().fold(alg.one(), |acc, &i| acc.mul(&f[i]));
            t.set(k, k, &prod);
        }
        maps.insert(-(m as i32), t);
    }
    ChainMap::new(&src, &tgt, maps)
}

/// Outcome of a homotopy check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyReport {
    pub columns_checked: usize,
    pub failure: Option<String>,
}

impl HomotopyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks `d h + h d = f - g` on the scalar basis vectors of `K` accepted by
/// `keep(deg, scalar_index)`. Each map is given over `Z/p^N` by degree:
/// `h[i] : K^i -> L^{i-1}`, `f[i], g[i] : K^i -> L^i`.
pub fn check_homotopy<F>(
    k: &Complex,
    l: &Complex,
    h: &BTreeMap<i32, ScalarMatrix>,
    f: &BTreeMap<i32, ScalarMatrix>,
    g: &BTreeMap<i32, ScalarMatrix>,
    keep: F,
) -> HomotopyReport
where
    F: Fn(i32, usize) -> bool,
{
    let m = k.alg.modulus();
    let b = k.alg.dim();
    let get = |map: &BTreeMap<i32, ScalarMatrix>, i: i32, rows: usize, cols: usize| {
        map.get(&i)
            .cloned()
            .unwrap_or_else(|| ScalarMatrix::zeros(rows, cols, m))
    };
    let mut checked = 0;
    for i in k.degrees() {
        let (ki, li) = (k.rank(i) * b, l.rank(i) * b);
        let cols: Vec<usize> = (0..ki).filter(|&c| keep(i, c)).collect();
        if cols.is_empty() {
            continue;
        }
        let hi = get(h, i, l.rank(i - 1) * b, ki);
        let hn = get(h, i + 1, li, k.rank(i + 1) * b);
        let dl = l.diff(i - 1).restrict_scalars();
        let dk = k.diff(i).restrict_scalars();
        let lhs = dl
            .mul(&hi.select_cols(&cols))
            .and_then(|x| x.add(&hn.mul(&dk.select_cols(&cols))?));
        let rhs = get(f, i, li, ki)
            .select_cols(&cols)
            .sub(&get(g, i, li, ki).select_cols(&cols));
        match (lhs, rhs) {
            (Ok(a), Ok(c)) if a == c => checked += cols.len(),
            (Ok(a), Ok(c)) => {
                let bad = (0..cols.len())
                    .find(|&j| (0..a.rows()).any(|r| a.get(r, j) != c.get(r, j)))
                    .unwrap_or(0);
                return HomotopyReport {
                    columns_checked: checked,
                    failure: Some(format!("degree {i}, basis vector {}", cols[bad])),
                };
            }
            (Err(e), _) | (_, Err(e)) => {
                return HomotopyReport {
                    columns_checked: checked,
                    failure: Some(format!("degree {i}: {e}")),
                }
            }
        }
    }
    HomotopyReport {
        columns_checked: checked,
        failure: None,
    }
}

/// The standard isomorphism `Hom(K ⊗ L, M) -> Hom(K, Hom(L, M))` as a map of
/// underlying modules in degree `n`, `f ↦ (x ↦ (y ↦ f(x ⊗ y)))`.
///
/// Both sides are built from [`tensor`] and [`hom_complex`]; the caller can
/// check it commutes with the differentials.
pub fn adjunction_map(
    k: &Complex,
    l: &Complex,
    mcx: &Complex,
) -> Result<(Complex, Complex, ChainMap)> {
    let kl = tensor(k, l)?;
    let lhs = hom_complex(&kl, mcx)?;
    let lm = hom_complex(l, mcx)?;
    let rhs = hom_complex(k, &lm)?;
    let alg = &k.alg;
    let one = alg.one();
    let mut maps = BTreeMap::new();
    for n in lhs.degrees() {
        let mut t = FreeModuleMap::zeros(alg, rhs.rank(n), lhs.rank(n));
        let src: BTreeMap<i32, usize> = hom_layout(&kl, mcx, n).into_iter().collect();
        // Target: factors p (degree of K) with Hom^{n}(K^p, (Hom(L,M))^{p+n}).
        for (p, toff) in hom_layout(k, &lm, n) {
            let q = p + n;
            let lm_layout: BTreeMap<i32, usize> = hom_layout(l, mcx, q).into_iter().collect();
            let kl_cols = |s: i32| -> BTreeMap<i32, usize> {
                let mut off = 0;
                let mut v = BTreeMap::new();
                for i in k.degrees() {
                    let j = s - i;
                    if j < l.lo || j > l.hi() {
                        continue;
                    }
                    v.insert(i, off);
                    off += k.rank(i) * l.rank(j);
                }
                v
            };
            for (&j, &lmoff) in &lm_layout {
                // Component Hom(L^j, M^{j+q}); source factor s = p + j of K ⊗ L.
                let s = p + j;
                let Some(&soff) = src.get(&s) else { continue };
                let Some(&kloff) = kl_cols(s).get(&p) else { continue };
                let (rk, rl, rm) = (k.rank(p), l.rank(j), mcx.rank(j + q));
                let kl_rank = kl.rank(s);
                for x in 0..rk {
                    for y in 0..rl {
                        for z in 0..rm {
                            // f entry: row z, column (kloff + x*rl + y) of the s factor.
                            let fi = soff + z * kl_rank + kloff + x * rl + y;
                            // g entry: row (lmoff + z*rl + y), column x of the p factor.
                            let gi = toff + (lmoff + z * rl + y) * rk + x;
                            t.set(gi, fi, &one);
                        }
                    }
                }
            }
        }
        maps.insert(n, t);
    }
    let map = ChainMap::new(&lhs, &rhs, maps)?;
    Ok((lhs, rhs, map))
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

    fn z25() -> Arc<TruncatedAlgebra> {
        make_poly_algebra(Modulus::new(5, 2).unwrap(), &[]).unwrap()
    }

    #[test]
    fn koszul_example() {
        let a = f5t3();
        let t = a.generator(0);
        let k = koszul(&a, &[t]).unwrap();
        let h = k.cohomology();
        assert_eq!(h[&0].exponents(), &[1]);
        assert_eq!(h[&-1].exponents(), &[1]);
        // H^{-1} is spanned by T^2.
        let d = k.diff(-1).restrict_scalars();
        let t2 = ScalarMatrix::from_rows(a.modulus(), &[vec![0], vec![0], vec![1]]).unwrap();
        assert!(d.mul(&t2).unwrap().is_zero());
    }

    #[test]
    fn koszul_transition_commutes() {
        let a = make_poly_algebra(
            Modulus::new(3, 2).unwrap(),
            &[
                GeneratorSpec::polynomial("T", 3),
                GeneratorSpec::polynomial("U", 2),
            ],
        )
        .unwrap();
        let f = [a.generator(0), a.generator(1).add(&a.constant(3))];
        for n in 0..3 {
            koszul_transition(&a, &f, n).unwrap();
        }
    }

    #[test]
    fn cone_of_multiplication() {
        let a = z25();
        let k = Complex::concentrated(&a, 1, 0);
        let five = FreeModuleMap::from_entries(&a, 1, 1, &[a.constant(5)]).unwrap();
        let f = ChainMap::new(&k, &k, [(0, five)].into()).unwrap();
        let c = cone(&f).unwrap();
        let h = c.cohomology();
        assert_eq!(h[&-1].exponents(), &[1]);
        assert_eq!(h[&0].exponents(), &[1]);
    }

    #[test]
    fn shift_signs_and_composition() {
        let a = f5t3();
        let k = koszul(&a, &[a.generator(0)]).unwrap();
        let s = k.shift(1);
        assert_eq!(s.lo(), -2);
        assert_eq!(s.diff(-2), k.diff(-1).neg());
        assert_eq!(k.shift(2).shift(-3).diff(0), k.shift(-1).diff(0));
    }

    #[test]
    fn tensor_of_koszul_is_koszul() {
        let a = make_poly_algebra(
            Modulus::new(5, 1).unwrap(),
            &[
                GeneratorSpec::polynomial("T1", 2),
                GeneratorSpec::polynomial("T2", 2),
            ],
        )
        .unwrap();
        let (t1, t2) = (a.generator(0), a.generator(1));
        let k1 = koszul(&a, &[t1.clone()]).unwrap();
        let k2 = koszul(&a, &[t2.clone()]).unwrap();
        let t = tensor(&k1, &k2).unwrap();
        let k = koszul(&a, &[t1, t2]).unwrap();
        assert_eq!(t.cohomology(), k.cohomology());
    }

    #[test]
    fn hom_complex_and_adjunction() {
        let a = f5t3();
        let t = a.generator(0);
        let k = koszul(&a, &[t.clone()]).unwrap();
        let l = koszul(&a, &[t.pow(2)]).unwrap().shift(-1);
        let m = Complex::concentrated(&a, 1, 0);
        let h = hom_complex(&k, &m).unwrap();
        assert_eq!(h.lo(), 0);
        assert_eq!(h.hi(), 1);
        let (_, _, phi) = adjunction_map(&k, &l, &m).unwrap();
        assert!(phi.is_bijective());
    }

    #[test]
    fn double_complex_total() {
        let a = z25();
        let five = FreeModuleMap::from_entries(&a, 1, 1, &[a.constant(5)]).unwrap();
        let ranks = [((0, 0), 1), ((1, 0), 1), ((0, 1), 1), ((1, 1), 1)].into();
        let d1 = [((0, 0), five.clone()), ((0, 1), five.clone())].into();
        let d2 = [((0, 0), five.clone()), ((1, 0), five.clone())].into();
        let dc = DoubleComplex::new(&a, ranks, d1, d2).unwrap();
        let tot = dc.total_complex().unwrap();
        assert!(tot.diff(1).compose(&tot.diff(0)).unwrap().is_zero());
    }

    #[test]
    fn homotopy_check_detects_identity_on_acyclic() {
        let a = z25();
        // 0 -> R --id--> R -> 0 is contractible with h = id backwards.
        let k = Complex::new(&a, 0, vec![1, 1], vec![FreeModuleMap::identity(&a, 1)]).unwrap();
        let m = a.modulus();
        let id = ScalarMatrix::identity(1, m);
        let h = [(1, id.clone())].into();
        let f = [(0, id.clone()), (1, id.clone())].into();
        let r = check_homotopy(&k, &k, &h, &f, &BTreeMap::new(), |_, _| true);
        assert!(r.passed());
        let r = check_homotopy(&k, &k, &BTreeMap::new(), &f, &BTreeMap::new(), |_, _| true);
        assert!(!r.passed());
    }
}
