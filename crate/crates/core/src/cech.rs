//! The Čech–Alexander double complex `M ⊗ Ω^j_{R(i)}` and its comparison with
//! the Higgs de Rham complex.
//!
//! Every cell is a free `R`-module with basis `(form, PD monomial, module
//! index)`. A form is a sorted set of one-form symbols: `dT_k` is symbol `k`,
//! `dξ_{k,l}` is symbol `n + (l-1) n + k`. The weight of a basis vector is the
//! PD weight plus the number of `dξ` factors, and cells keep weight `< W`.
//! Every differential is weight-nondecreasing, so the truncation is a quotient
//! double complex.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::algebra::{make_poly_algebra, FreeModuleMap, RingMap, TruncatedAlgebra};
use crate::coefficients::{ElementaryDivisors, ScalarMatrix};
use crate::complexes::{check_homotopy, subsets, ChainMap, Complex, DoubleComplex, HomotopyReport};
use crate::higgs::{dr_complex, HiggsModule};
use crate::stratification::{simplex_pushforward, PDLevel, SimplexMap, Stratification};
use crate::{Error, Result};

/// `Ω^•` of the scalar PD level `m`: forms on `n(m+1)` symbols with PD
/// coefficients of weight `< w`.
#[derive(Clone, Debug)]
pub struct OmegaLevel {
    pub m: u32,
    pub n: u32,
    pub w: u32,
    pd: PDLevel,
}

impl OmegaLevel {
    pub fn rank1(&self) -> usize {
        (self.n * (self.m + 1)) as usize
    }

    pub fn pd(&self) -> &PDLevel {
        &self.pd
    }

    pub fn pd_algebra(&self) -> &Arc<TruncatedAlgebra> {
        self.pd.algebra()
    }

    pub fn is_xi_symbol(&self, s: usize) -> bool {
        s >= self.n as usize
    }

    pub fn symbol_name(&self, s: usize) -> String {
        let n = self.n as usize;
        if s < n {
            format!("dT{}", s + 1)
        } else {
            let v = s - n;
            format!("dxi{}_{}", v % n + 1, v / n + 1)
        }
    }

    /// Bases of `Ω^j`: `j`-subsets of the symbols.
    pub fn forms(&self, j: usize) -> Vec<Vec<usize>> {
        subsets(self.rank1(), j)
    }

    pub fn pd_weight(&self, c: usize) -> u32 {
        self.pd_algebra().exponents(c).iter().sum()
    }

    pub fn weight(&self, form: &[usize], c: usize) -> u32 {
        self.pd_weight(c) + form.iter().filter(|&&s| self.is_xi_symbol(s)).count() as u32
    }

    /// `d(ξ^[c]) = Σ_v ξ^[c - e_v] dξ_v`, as `(variable, monomial)` pairs.
    pub fn d_pd(&self, c: usize) -> Vec<(usize, usize)> {
        let alg = self.pd_algebra();
        let e = alg.exponents(c).to_vec();
        let mut out = Vec::new();
        for (v, &x) in e.iter().enumerate() {
            if x > 0 {
                let mut f = e.clone();
                f[v] -= 1;
                out.push((v, alg.index_of(&f).expect("smaller monomial")));
            }
        }
        out
    }
}

fn scalar_ring(modulus: crate::coefficients::Modulus) -> Arc<TruncatedAlgebra> {
    make_poly_algebra(modulus, &[]).expect("no generators")
}

/// Level `m` of the truncated PD forms over `Z/p^N`.
pub fn build_omega(
    modulus: crate::coefficients::Modulus,
    n: u32,
    m: u32,
    w: u32,
) -> Result<OmegaLevel> {
    let zp = scalar_ring(modulus);
    Ok(OmegaLevel {
        m,
        n,
        w,
        pd: PDLevel::new(&zp, n, m, w)?,
    })
}

/// Images of a one-form symbol under `f`, all with coefficient `+1`.
fn symbol_image(f: &SimplexMap, n: usize, s: usize) -> Vec<usize> {
    let v = f.values();
    if s < n {
        let mut out = vec![s];
        out.extend((1..=v[0] as usize).map(|l| n + (l - 1) * n + s));
        out
    } else {
        let var = s - n;
        let (k, l) = (var % n, var / n + 1);
        (v[l - 1] as usize + 1..=v[l] as usize)
            .map(|t| n + (t - 1) * n + k)
            .collect()
    }
}

/// Sorts `seq` in place; returns the sign, or `None` on a repeated symbol.
fn sort_sign(seq: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 0..seq.len() {
        for j in 0..seq.len() - 1 - i {
            if seq[j] == seq[j + 1] {
                return None;
            }
            if seq[j] > seq[j + 1] {
                seq.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if seq.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

/// Wedge of the images of `form` under `f`.
fn form_image(f: &SimplexMap, n: usize, form: &[usize]) -> Vec<(Vec<usize>, i64)> {
    let images: Vec<Vec<usize>> = form.iter().map(|&s| symbol_image(f, n, s)).collect();
    let mut acc: Vec<Vec<usize>> = vec![vec![]];
    for im in &images {
        let mut next = Vec::new();
        for a in &acc {
            for &t in im {
                if !a.contains(&t) {
                    let mut b = a.clone();
                    b.push(t);
                    next.push(b);
                }
            }
        }
        acc = next;
    }
    let mut out: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for mut seq in acc {
        if let Some(sg) = sort_sign(&mut seq) {
            *out.entry(seq).or_insert(0) += sg;
        }
    }
    out.into_iter().filter(|(_, c)| *c != 0).collect()
}

/// Pushforward of `Ω^j` along `f` on the `(form, PD monomial)` basis, as a
/// scalar matrix. Rows and columns list `forms(j) × PD basis`, form outer.
pub fn omega_pushforward(
    f: &SimplexMap,
    src: &OmegaLevel,
    tgt: &OmegaLevel,
    j: usize,
) -> Result<ScalarMatrix> {
    let ring = simplex_pushforward(f, &src.pd, &tgt.pd)?;
    let (sf, tf) = (src.forms(j), tgt.forms(j));
    let (sd, td) = (src.pd_algebra().dim(), tgt.pd_algebra().dim());
    let tindex: HashMap<&Vec<usize>, usize> = tf.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let m = src.pd_algebra().modulus();
    let mut out = ScalarMatrix::zeros(tf.len() * td, sf.len() * sd, m);
    let rm = ring.matrix();
    for (a, form) in sf.iter().enumerate() {
        let fi = form_image(f, src.n as usize, form);
        for c in 0..sd {
            for (g, sg) in &fi {
                let b = tindex[g];
                for t in 0..td {
                    let x = rm.get(t, c);
                    if x != 0 {
                        out.add_at(b * td + t, a * sd + c, m.mul(x, m.reduce_i64(*sg)));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Basis of one cell.
#[derive(Clone, Debug)]
pub struct CellBasis {
    pub items: Vec<(Vec<usize>, usize)>,
    pub weights: Vec<u32>,
    index: HashMap<(Vec<usize>, usize), usize>,
}

impl CellBasis {
    fn new(level: &OmegaLevel, j: usize) -> Self {
        let mut items = Vec::new();
        let mut weights = Vec::new();
        let dim = level.pd_algebra().dim();
        for form in level.forms(j) {
            for c in 0..dim {
                let w = level.weight(&form, c);
                if w < level.w {
                    items.push((form.clone(), c));
                    weights.push(w);
                }
            }
        }
        let index = items
            .iter()
            .enumerate()
            .map(|(k, it)| (it.clone(), k))
            .collect();
        CellBasis {
            items,
            weights,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn position(&self, form: &[usize], c: usize) -> Option<usize> {
        self.index.get(&(form.to_vec(), c)).copied()
    }
}

/// Which cells of the grid to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridShape {
    pub i_max: u32,
    pub j_max: u32,
    /// Keep only `i + j <= total_max`.
    pub total_max: Option<u32>,
}

impl GridShape {
    /// Enough cells for total degrees `<= n`.
    pub fn standard(n: u32) -> Self {
        GridShape {
            i_max: n + 1,
            j_max: n,
            total_max: Some(n + 1),
        }
    }

    fn contains(&self, i: u32, j: u32) -> bool {
        i <= self.i_max && j <= self.j_max && self.total_max.is_none_or(|t| i + j <= t)
    }
}

/// The grid with its bases and differentials.
#[derive(Clone, Debug)]
pub struct CechDouble {
    pub higgs: HiggsModule,
    pub shape: GridShape,
    pub w: u32,
    levels: Vec<OmegaLevel>,
    cells: BTreeMap<(i32, i32), CellBasis>,
    dc: DoubleComplex,
}

/// Sparse accumulation of `Σ coef * A` blocks into an `R`-linear map.
struct BlockBuilder<'a> {
    map: FreeModuleMap,
    r: usize,
    blocks: &'a [FreeModuleMap],
}

impl BlockBuilder<'_> {
    /// Adds `coef * blocks[t]` at block position `(row, col)`; `t = None`
    /// stands for the identity.
    fn add(&mut self, row: usize, col: usize, t: Option<usize>, coef: u64) {
        if coef == 0 {
            return;
        }
        let alg = self.map.algebra().clone();
        match t {
            None => {
                let e = alg.one().scale(coef);
                for a in 0..self.r {
                    self.map.add_to(row * self.r + a, col * self.r + a, &e);
                }
            }
            Some(t) => {
                let b = &self.blocks[t];
                for a in 0..self.r {
                    for c in 0..self.r {
                        if !b.entry_is_zero(a, c) {
                            self.map
                                .add_to(row * self.r + a, col * self.r + c, &b.entry(a, c).scale(coef));
                        }
                    }
                }
            }
        }
    }
}

fn coface_map(
    h: &HiggsModule,
    twist: &[(usize, FreeModuleMap)],
    src: &OmegaLevel,
    tgt: &OmegaLevel,
    sb: &CellBasis,
    tb: &CellBasis,
    k: u32,
) -> Result<FreeModuleMap> {
    let f = SimplexMap::coface(tgt.m, k);
    let ring: RingMap = simplex_pushforward(&f, &src.pd, &tgt.pd)?;
    let rm = ring.matrix();
    let pd = tgt.pd_algebra();
    let m = pd.modulus();
    let r = h.rank();
    let blocks: Vec<FreeModuleMap> = twist.iter().map(|(_, a)| a.clone()).collect();
    let mut bb = BlockBuilder {
        map: FreeModuleMap::zeros(h.algebra(), tb.len() * r, sb.len() * r),
        r,
        blocks: &blocks,
    };
    let n = src.n as usize;
    let mut form_cache: HashMap<Vec<usize>, Vec<(Vec<usize>, i64)>> = HashMap::new();
    for (col, (form, c)) in sb.items.iter().enumerate() {
        let fi = form_cache
            .entry(form.clone())
            .or_insert_with(|| form_image(&f, n, form))
            .clone();
        for t in 0..pd.dim() {
            let x = rm.get(t, *c);
            if x == 0 {
                continue;
            }
            for (g, sg) in &fi {
                let base = m.mul(x, m.reduce_i64(*sg));
                if k == 0 {
                    // ε-twisted face: multiply by Θ_m ⊗ ξ_{•,1}^[m].
                    for (ti, (mono, _)) in twist.iter().enumerate() {
                        let Some((u, kc)) = pd.basis_product(*mono, t) else {
                            continue;
                        };
                        if let Some(row) = tb.position(g, u) {
                            bb.add(row, col, Some(ti), m.mul(base, kc));
                        }
                    }
                } else if let Some(row) = tb.position(g, t) {
                    bb.add(row, col, None, base);
                }
            }
        }
    }
    Ok(bb.map)
}

fn d2_map(
    h: &HiggsModule,
    level: &OmegaLevel,
    sb: &CellBasis,
    tb: &CellBasis,
) -> FreeModuleMap {
    let r = h.rank();
    let n = level.n as usize;
    let m = h.algebra().modulus();
    let mut bb = BlockBuilder {
        map: FreeModuleMap::zeros(h.algebra(), tb.len() * r, sb.len() * r),
        r,
        blocks: h.thetas(),
    };
    let insert = |form: &[usize], s: usize| -> Option<(Vec<usize>, i64)> {
        if form.contains(&s) {
            return None;
        }
        let before = form.iter().filter(|&&x| x < s).count();
        let mut g = form.to_vec();
        g.insert(before, s);
        Some((g, if before % 2 == 0 { 1 } else { -1 }))
    };
    for (col, (form, c)) in sb.items.iter().enumerate() {
        // θ ∧
        for a in 0..n {
            if let Some((g, sg)) = insert(form, a) {
                if let Some(row) = tb.position(&g, *c) {
                    bb.add(row, col, Some(a), m.reduce_i64(sg));
                }
            }
        }
        // d_R
        for (v, c2) in level.d_pd(*c) {
            if let Some((g, sg)) = insert(form, n + v) {
                if let Some(row) = tb.position(&g, c2) {
                    bb.add(row, col, None, m.reduce_i64(sg));
                }
            }
        }
    }
    bb.map
}

/// Builds and verifies the grid for the given shape.
pub fn build_grid(
    h: &HiggsModule,
    s: &Stratification,
    shape: GridShape,
    w: u32,
) -> Result<CechDouble> {
    let n = h.n() as u32;
    if s.rank() != h.rank() || s.level1.n != n {
        return Err(Error::Invalid("stratification does not match the Higgs module".into()));
    }
    let modulus = h.algebra().modulus();
    let levels: Vec<OmegaLevel> = (0..=shape.i_max + 1)
        .map(|m| build_omega(modulus, n, m, w))
        .collect::<Result<_>>()?;
    let mut cells = BTreeMap::new();
    for i in 0..=shape.i_max {
        for j in 0..=shape.j_max {
            if shape.contains(i, j) {
                cells.insert((i as i32, j as i32), CellBasis::new(&levels[i as usize], j as usize));
            }
        }
    }
    // Θ_m placed at ξ_{•,1}^[m] of each level, by level.
    let coeffs = s.coefficients();
    let twist_for = |lvl: &OmegaLevel| -> Vec<(usize, FreeModuleMap)> {
        coeffs
            .iter()
            .filter_map(|(mi, a)| {
                let e = lvl.pd.xi_exponents(1, mi);
                lvl.pd_algebra().index_of(&e).map(|idx| (idx, a.clone()))
            })
            .collect()
    };
    let keys: Vec<(i32, i32)> = cells.keys().copied().collect();
    let built = crate::par::map(&keys, |&(i, j)| -> Result<(Option<FreeModuleMap>, Option<FreeModuleMap>)> {
        let sb = &cells[&(i, j)];
        let d1 = match cells.get(&(i + 1, j)) {
            Some(tb) => {
                let (src, tgt) = (&levels[i as usize], &levels[i as usize + 1]);
                let twist = twist_for(tgt);
                let mut acc = FreeModuleMap::zeros(h.algebra(), tb.len() * h.rank(), sb.len() * h.rank());
                for k in 0..=(i as u32 + 1) {
                    let f = coface_map(h, &twist, src, tgt, sb, tb, k)?;
                    acc = if k % 2 == 0 { acc.add(&f)? } else { acc.sub(&f)? };
                }
                Some(acc)
            }
            None => None,
        };
        let d2 = cells
            .get(&(i, j + 1))
            .map(|tb| d2_map(h, &levels[i as usize], sb, tb));
        Ok((d1, d2))
    });
    let mut ranks = BTreeMap::new();
    let mut d1s = BTreeMap::new();
    let mut d2s = BTreeMap::new();
    for (key, res) in keys.iter().zip(built) {
        let (d1, d2) = res?;
        ranks.insert(*key, cells[key].len() * h.rank());
        if let Some(d) = d1 {
            d1s.insert(*key, d);
        }
        if let Some(d) = d2 {
            d2s.insert(*key, d);
        }
    }
    let dc = DoubleComplex::new(h.algebra(), ranks, d1s, d2s)?;
    Ok(CechDouble {
        higgs: h.clone(),
        shape,
        w,
        levels,
        cells,
        dc,
    })
}

/// The standard grid, enough for cohomology in total degrees `<= n`.
pub fn build_cech_double(h: &HiggsModule, s: &Stratification, w: u32) -> Result<CechDouble> {
    build_grid(h, s, GridShape::standard(h.n() as u32), w)
}

impl CechDouble {
    pub fn double_complex(&self) -> &DoubleComplex {
        &self.dc
    }

    pub fn cell(&self, i: i32, j: i32) -> Option<&CellBasis> {
        self.cells.get(&(i, j))
    }

    pub fn level(&self, m: u32) -> &OmegaLevel {
        &self.levels[m as usize]
    }

    fn cell_weights(&self, i: i32, j: i32) -> Vec<u32> {
        let r = self.higgs.rank();
        self.cells
            .get(&(i, j))
            .map(|c| c.weights.iter().flat_map(|&w| std::iter::repeat_n(w, r)).collect())
            .unwrap_or_default()
    }

    fn with_row_weights(&self, c: Complex, j: i32) -> Result<Complex> {
        let w = c.degrees().map(|i| self.cell_weights(i, j)).collect();
        c.with_weights(w)
    }

    /// Row `j = 0`.
    pub fn ca_complex(&self) -> Result<Complex> {
        self.with_row_weights(self.dc.row(0)?, 0)
    }

    /// Column `i = 0`, which is the de Rham complex.
    pub fn dr_column(&self) -> Result<Complex> {
        let c = self.dc.column(0)?;
        let w = c.degrees().map(|j| self.cell_weights(0, j)).collect();
        c.with_weights(w)
    }

    pub fn total(&self) -> Result<Complex> {
        let t = self.dc.total_complex()?;
        let w = t
            .degrees()
            .map(|k| {
                self.dc
                    .total_layout(k)
                    .into_iter()
                    .flat_map(|((i, j), _)| self.cell_weights(i, j))
                    .collect()
            })
            .collect();
        t.with_weights(w)
    }

    /// Projection of the total complex onto row 0 (`row = true`) or
    /// column 0.
    pub fn projection(&self, tot: &Complex, row: bool) -> Result<ChainMap> {
        let target = if row { self.ca_complex()? } else { self.dr_column()? };
        let alg = self.higgs.algebra();
        let mut maps = BTreeMap::new();
        for k in tot.degrees() {
            let cell = if row { (k, 0) } else { (0, k) };
            let mut f = FreeModuleMap::zeros(alg, target.rank(k), tot.rank(k));
            if let Some(&(_, off)) = self.dc.total_layout(k).iter().find(|(c, _)| *c == cell) {
                f.set_block(0, off, &FreeModuleMap::identity(alg, target.rank(k)));
            }
            maps.insert(k, f);
        }
        ChainMap::new(tot, &target, maps)
    }
}

/// Verdict of a windowed check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    ArtifactAtTopWeight,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::ArtifactAtTopWeight => "ARTIFACT-AT-TOP-WEIGHT",
        })
    }
}

fn verdict(raw: bool, windowed: bool) -> Verdict {
    match (raw, windowed) {
        (true, _) => Verdict::Pass,
        (false, true) => Verdict::ArtifactAtTopWeight,
        (false, false) => Verdict::Fail,
    }
}

/// Acyclicity of a cone in one degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeCheck {
    pub degree: i32,
    pub raw_length: u64,
    pub window_exact: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub n: u32,
    pub w: u32,
    /// Classes and boundaries of weight below this are trusted.
    pub window: u32,
    pub ca: BTreeMap<i32, ElementaryDivisors>,
    pub dr: BTreeMap<i32, ElementaryDivisors>,
    pub total: BTreeMap<i32, ElementaryDivisors>,
    pub cone_ca: Vec<ConeCheck>,
    pub cone_dr: Vec<ConeCheck>,
    pub agreement: Vec<(i32, Verdict)>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.cone_ca
            .iter()
            .chain(&self.cone_dr)
            .all(|c| c.verdict != Verdict::Fail)
            && self.agreement.iter().all(|(_, v)| *v != Verdict::Fail)
    }
}

fn cone_checks(f: &ChainMap, degs: std::ops::RangeInclusive<i32>, window: u32) -> Result<Vec<ConeCheck>> {
    let c = crate::complexes::cone(f)?;
    let src = f.source();
    let tgt = f.target();
    let dim = src.algebra().dim();
    let list: Vec<i32> = degs.collect();
    let out = crate::par::map(&list, |&k| {
        let raw = c.cohomology_length(k);
        let window_exact = if raw == 0 {
            true
        } else {
            let mut wts: Vec<u32> = src.weights(k + 1).map(|w| w.to_vec()).unwrap_or_default();
            wts.extend(tgt.weights(k).map(|w| w.to_vec()).unwrap_or_default());
            c.cycles_in_window_are_boundaries(k, |s| wts[s / dim] < window)
        };
        ConeCheck {
            degree: k,
            raw_length: raw,
            window_exact,
            verdict: verdict(raw == 0, window_exact),
        }
    });
    Ok(out)
}

/// Cohomology of ČA, DR and the total complex in degrees `0..=n`, the two
/// cone checks in degrees `-1..n`, and the agreement of ČA with DR.
pub fn compare_with_dr(d: &CechDouble) -> Result<ComparisonReport> {
    let n = d.higgs.n() as i32;
    let window = d.w.saturating_sub(n as u32 + 1);
    let ca = d.ca_complex()?;
    let dr = d.dr_column()?;
    let tot = d.total()?;
    let ca_h = ca.cohomology_in(0, n);
    let dr_h = dr.cohomology_in(0, n);
    let tot_h = tot.cohomology_in(0, n);
    let cone_ca = cone_checks(&d.projection(&tot, true)?, -1..=n - 1, window)?;
    let cone_dr = cone_checks(&d.projection(&tot, false)?, -1..=n - 1, window)?;
    let cones_ok = cone_ca.iter().chain(&cone_dr).all(|c| c.window_exact);
    let agreement = (0..=n)
        .map(|k| {
            let same = ca_h.get(&k) == dr_h.get(&k);
            (k, if same { Verdict::Pass } else if cones_ok { Verdict::ArtifactAtTopWeight } else { Verdict::Fail })
        })
        .collect();
    Ok(ComparisonReport {
        n: n as u32,
        w: d.w,
        window,
        ca: ca_h,
        dr: dr_h,
        total: tot_h,
        cone_ca,
        cone_dr,
        agreement,
    })
}

/// Does the column built here coincide with [`dr_complex`]?
pub fn dr_column_matches(d: &CechDouble) -> Result<bool> {
    let a = d.dr_column()?;
    let b = dr_complex(&d.higgs)?;
    Ok(a.lo() == b.lo()
        && a.hi() == b.hi()
        && a.degrees().all(|k| a.rank(k) == b.rank(k) && a.diff(k) == b.diff(k)))
}

/// `H^k(ČA)` for `k <= n` at level caps `i_max` and `i_max + 1`.
pub fn ca_stability(
    h: &HiggsModule,
    s: &Stratification,
    w: u32,
    i_max: u32,
) -> Result<(BTreeMap<i32, ElementaryDivisors>, BTreeMap<i32, ElementaryDivisors>)> {
    let n = h.n() as i32;
    let run = |im: u32| -> Result<BTreeMap<i32, ElementaryDivisors>> {
        let shape = GridShape {
            i_max: im,
            j_max: 0,
            total_max: None,
        };
        let d = build_grid(h, s, shape, w)?;
        Ok(d.ca_complex()?.cohomology_in(0, n))
    };
    Ok((run(i_max)?, run(i_max + 1)?))
}

/// The relative PD de Rham complex of level `m` over `Z/p^N`, with the
/// integration homotopy `h(ξ^[c] dξ_v ∧ η) = ξ^[c + e_v] η` for `v` the
/// first non-constant variable.
pub struct PoincareData {
    pub complex: Complex,
    pub homotopy: BTreeMap<i32, ScalarMatrix>,
    pub retraction: BTreeMap<i32, ScalarMatrix>,
    pub bases: Vec<Vec<(Vec<usize>, usize)>>,
    pub weights: Vec<Vec<u32>>,
}

/// Builds the relative complex and the homotopy, and checks
/// `dh + hd = id - ιπ` on weight `< W - 1` (`windowed`) and on all weights.
pub fn pd_poincare_homotopy(
    modulus: crate::coefficients::Modulus,
    n: u32,
    m: u32,
    w: u32,
) -> Result<(PoincareData, HomotopyReport, HomotopyReport)> {
    let lvl = build_omega(modulus, n, m, w)?;
    let zp = scalar_ring(modulus);
    let nv = (n * m) as usize;
    let nsym = n as usize;
    let pd = lvl.pd_algebra().clone();
    // Relative forms only use dξ symbols.
    let mut bases: Vec<Vec<(Vec<usize>, usize)>> = Vec::new();
    let mut weights = Vec::new();
    for j in 0..=nv {
        let mut b = Vec::new();
        let mut wt = Vec::new();
        for u in subsets(nv, j) {
            for c in 0..pd.dim() {
                let wgt = lvl.pd_weight(c) + j as u32;
                if wgt < w {
                    b.push((u.clone(), c));
                    wt.push(wgt);
                }
            }
        }
        bases.push(b);
        weights.push(wt);
    }
    let index: Vec<HashMap<(Vec<usize>, usize), usize>> = bases
        .iter()
        .map(|b| b.iter().enumerate().map(|(k, x)| (x.clone(), k)).collect())
        .collect();
    let md = modulus;
    let mut diffs = Vec::new();
    for j in 0..nv {
        let mut d = ScalarMatrix::zeros(bases[j + 1].len(), bases[j].len(), md);
        for (col, (u, c)) in bases[j].iter().enumerate() {
            for (v, c2) in lvl.d_pd(*c) {
                if u.contains(&v) {
                    continue;
                }
                let before = u.iter().filter(|&&x| x < v).count();
                let mut g = u.clone();
                g.insert(before, v);
                if let Some(&row) = index[j + 1].get(&(g, c2)) {
                    d.add_at(row, col, md.reduce_i64(if before % 2 == 0 { 1 } else { -1 }));
                }
            }
        }
        diffs.push(FreeModuleMap::from_scalar(&zp, &d));
    }
    let ranks = bases.iter().map(|b| b.len()).collect();
    let complex = Complex::new(&zp, 0, ranks, diffs)?;
    let _ = nsym;
    let mut homotopy = BTreeMap::new();
    let mut retraction = BTreeMap::new();
    for j in 0..=nv {
        let rows = if j == 0 { 0 } else { bases[j - 1].len() };
        let mut hm = ScalarMatrix::zeros(rows, bases[j].len(), md);
        let mut rt = ScalarMatrix::zeros(bases[j].len(), bases[j].len(), md);
        for (col, (u, c)) in bases[j].iter().enumerate() {
            let e = pd.exponents(*c);
            let first_c = e.iter().position(|&x| x > 0);
            let first_u = u.first().copied();
            let v = match (first_c, first_u) {
                (None, None) => {
                    rt.set(col, col, 1);
                    continue;
                }
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
            };
            if first_u == Some(v) {
                let mut e2 = e.to_vec();
                e2[v] += 1;
                let Some(c2) = pd.index_of(&e2) else { continue };
                if let Some(&row) = index[j - 1].get(&(u[1..].to_vec(), c2)) {
                    hm.set(row, col, 1);
                }
            }
        }
        if j > 0 {
            homotopy.insert(j as i32, hm);
        }
        retraction.insert(j as i32, rt);
    }
    let ident: BTreeMap<i32, ScalarMatrix> = (0..=nv)
        .map(|j| (j as i32, ScalarMatrix::identity(bases[j].len(), md)))
        .collect();
    let data = PoincareData {
        complex,
        homotopy,
        retraction,
        bases,
        weights,
    };
    let win = |k: i32, s: usize| data.weights[k as usize][s] + 1 < w;
    let windowed = check_homotopy(&data.complex, &data.complex, &data.homotopy, &ident, &data.retraction, win);
    let full = check_homotopy(&data.complex, &data.complex, &data.homotopy, &ident, &data.retraction, |_, _| true);
    Ok((data, windowed, full))
}

/// Exactness of row `j` (cosimplicial degrees `0..i_max`).
#[derive(Clone, Debug)]
pub struct ContractibilityReport {
    pub j: u32,
    pub checks: Vec<ConeCheck>,
}

impl ContractibilityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }
}

/// Checks that `M ⊗ Ω^j_{R(•)}` is exact in cosimplicial degrees `< i_max`,
/// raw and on weight `< window`.
pub fn cosimplicial_contractibility_check(
    h: &HiggsModule,
    s: &Stratification,
    j: u32,
    i_max: u32,
    w: u32,
    window: u32,
) -> Result<ContractibilityReport> {
    if j == 0 {
        return Err(Error::Invalid("contractibility needs j >= 1".into()));
    }
    let shape = GridShape {
        i_max,
        j_max: j,
        total_max: None,
    };
    let d = build_grid(h, s, shape, w)?;
    let row = d.with_row_weights(d.dc.row(j as i32)?, j as i32)?;
    let dim = h.algebra().dim();
    let degs: Vec<i32> = (0..i_max as i32).collect();
    let checks = crate::par::map(&degs, |&k| {
        let raw = row.cohomology_length(k);
        let wts = row.weights(k).map(|x| x.to_vec()).unwrap_or_default();
        let window_exact = raw == 0 || row.cycles_in_window_are_boundaries(k, |sc| wts[sc / dim] < window);
        ConeCheck {
            degree: k,
            raw_length: raw,
            window_exact,
            verdict: verdict(raw == 0, window_exact),
        }
    });
    Ok(ContractibilityReport { j, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_poly_algebra, GeneratorSpec};
    use crate::coefficients::Modulus;
    use crate::stratification::epsilon_from_theta;

    fn f5t3() -> Arc<TruncatedAlgebra> {
        make_poly_algebra(Modulus::new(5, 1).unwrap(), &[GeneratorSpec::polynomial("T", 3)]).unwrap()
    }

    #[test]
    fn omega_examples() {
        let m = Modulus::new(5, 1).unwrap();
        assert_eq!(build_omega(m, 1, 0, 3).unwrap().rank1(), 1);
        let o = build_omega(m, 1, 1, 3).unwrap();
        assert_eq!(o.rank1(), 2);
        let x2 = o.pd_algebra().index_of(&[2]).unwrap();
        let x1 = o.pd_algebra().index_of(&[1]).unwrap();
        assert_eq!(o.d_pd(x2), vec![(0, x1)]);
        assert_eq!(build_omega(m, 2, 3, 3).unwrap().rank1(), 8);
    }

    #[test]
    fn omega_pushforward_examples() {
        let m = Modulus::new(5, 1).unwrap();
        let (o1, o2) = (build_omega(m, 1, 1, 3).unwrap(), build_omega(m, 1, 2, 3).unwrap());
        // δ_0 : dT ↦ dT + dξ_{·,1}.
        let f = SimplexMap::coface(2, 0);
        let p = omega_pushforward(&f, &o1, &o2, 1).unwrap();
        let d2 = o2.pd_algebra().dim();
        let forms = o2.forms(1);
        let col = 0; // (dT, 1)
        let hits: Vec<usize> = (0..p.rows()).filter(|&r| p.get(r, col) != 0).collect();
        let names: Vec<String> = hits.iter().map(|&r| o2.symbol_name(forms[r / d2][0])).collect();
        assert_eq!(names, vec!["dT1", "dxi1_1"]);
        let id = SimplexMap::new(vec![0, 1], 1).unwrap();
        let p = omega_pushforward(&id, &o1, &o1, 1).unwrap();
        assert_eq!(p, ScalarMatrix::identity(p.rows(), m));
    }

    #[test]
    fn d_r_sign() {
        // d_R(dT ∧ ξ^[1]) = -dT ∧ dξ
        let a = f5t3();
        let h = HiggsModule::trivial(&a, 1, 1);
        let s = epsilon_from_theta(&h, 3).unwrap();
        let d = build_grid(&h, &s, GridShape { i_max: 1, j_max: 2, total_max: None }, 3).unwrap();
        let lvl = d.level(1);
        let src = d.cell(1, 1).unwrap();
        let tgt = d.cell(1, 2).unwrap();
        let xi = lvl.pd_algebra().index_of(&[1]).unwrap();
        let one = lvl.pd_algebra().index_of(&[0]).unwrap();
        let col = src.position(&[0], xi).unwrap();
        let row = tgt.position(&[0, 1], one).unwrap();
        let d2 = d.double_complex().d2(1, 1);
        assert_eq!(d2.entry(row, col), a.constant(-1));
    }

    #[test]
    fn square_zero_first_differential() {
        let a = make_poly_algebra(Modulus::new(3, 2).unwrap(), &[]).unwrap();
        let th = FreeModuleMap::from_entries(&a, 2, 2, &[a.constant(0), a.constant(3), a.constant(0), a.constant(0)]).unwrap();
        let h = HiggsModule::certified(&a, 2, vec![th.clone()], 0, 8).unwrap();
        let s = epsilon_from_theta(&h, 4).unwrap();
        let d = build_cech_double(&h, &s, 4).unwrap();
        let d1 = d.double_complex().d1(0, 0);
        let tgt = d.cell(1, 0).unwrap();
        let xi = d.level(1).pd_algebra().index_of(&[1]).unwrap();
        let row = tgt.position(&[], xi).unwrap();
        // Only the ξ^[1] component survives: ε(x) - x ⊗ 1 = θ(x) ⊗ ξ^[1].
        for k in 0..tgt.len() {
            let blk = d1.block(k * 2, 0, 2, 2);
            if k == row {
                assert_eq!(blk, th);
            } else {
                assert!(blk.is_zero());
            }
        }
    }

    #[test]
    fn trivial_crystal_hodge_tate() {
        let a = f5t3();
        let h = HiggsModule::trivial(&a, 1, 1);
        let s = epsilon_from_theta(&h, 4).unwrap();
        let d = build_cech_double(&h, &s, 4).unwrap();
        assert!(dr_column_matches(&d).unwrap());
        let rep = compare_with_dr(&d).unwrap();
        assert_eq!(rep.ca[&0].length(), 3);
        assert_eq!(rep.ca[&1].length(), 3);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.agreement.iter().all(|(_, v)| *v == Verdict::Pass));
    }

    #[test]
    fn theta_t_comparison() {
        let a = f5t3();
        let t = FreeModuleMap::from_entries(&a, 1, 1, &[a.generator(0)]).unwrap();
        let h = HiggsModule::certified(&a, 1, vec![t], 0, 8).unwrap();
        let s = epsilon_from_theta(&h, 5).unwrap();
        let d = build_cech_double(&h, &s, 5).unwrap();
        let rep = compare_with_dr(&d).unwrap();
        assert_eq!(rep.ca[&0].length(), 1);
        assert_eq!(rep.ca[&1].length(), 1);
        assert_eq!(rep.ca, rep.dr);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn rank_zero_is_zero() {
        let a = f5t3();
        let h = HiggsModule::trivial(&a, 0, 1);
        let s = epsilon_from_theta(&h, 3).unwrap();
        let d = build_cech_double(&h, &s, 3).unwrap();
        let rep = compare_with_dr(&d).unwrap();
        assert!(rep.ca.values().all(|x| x.is_zero()));
    }

    #[test]
    fn poincare_homotopy_holds() {
        let m = Modulus::new(3, 2).unwrap();
        for (n, lv) in [(1, 1), (1, 2), (2, 1)] {
            let (_, win, full) = pd_poincare_homotopy(m, n, lv, 4).unwrap();
            assert!(win.passed() && full.passed());
            assert!(win.columns_checked < full.columns_checked);
        }
    }

    #[test]
    fn contractibility_small() {
        let a = make_poly_algebra(Modulus::new(2, 2).unwrap(), &[GeneratorSpec::polynomial("T", 2)]).unwrap();
        let h = HiggsModule::trivial(&a, 1, 1);
        let s = epsilon_from_theta(&h, 4).unwrap();
        let rep = cosimplicial_contractibility_check(&h, &s, 1, 3, 4, 2).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn stability_in_level_cap() {
        let a = f5t3();
        let t = FreeModuleMap::from_entries(&a, 1, 1, &[a.generator(0)]).unwrap();
        let h = HiggsModule::certified(&a, 1, vec![t], 0, 8).unwrap();
        let s = epsilon_from_theta(&h, 5).unwrap();
        let (x, y) = ca_stability(&h, &s, 5, 2).unwrap();
        assert_eq!(x, y);
    }
}
