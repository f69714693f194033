//! Finite-basis commutative algebras over `Z/p^N`: monomially truncated
//! polynomial and divided-power generators, their elements, ring maps and
//! maps of free modules.

use crate::coefficients::{binomial_big, factorial_big, Modulus, ScalarMatrix};
use crate::{Error, Result};
use num_bigint::BigUint;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    Polynomial,
    DividedPower,
}

/// One generator. `cap` is exclusive: exponents (or PD weights) run over
/// `0..cap`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorSpec {
    pub name: String,
    pub kind: GeneratorKind,
    pub cap: u32,
    /// Counted in the algebra's total weight cap.
    pub weighted: bool,
    /// `(i, j)` for the generator `ξ_{i,j}/d` of a PD level.
    pub slot: Option<(u32, u32)>,
}

impl GeneratorSpec {
    pub fn polynomial(name: &str, cap: u32) -> Self {
        GeneratorSpec {
            name: name.to_string(),
            kind: GeneratorKind::Polynomial,
            cap,
            weighted: false,
            slot: None,
        }
    }

    pub fn divided_power(name: &str, cap: u32) -> Self {
        GeneratorSpec {
            name: name.to_string(),
            kind: GeneratorKind::DividedPower,
            cap,
            weighted: false,
            slot: None,
        }
    }

    /// The weighted PD generator `ξ_{i,j}/d`.
    pub fn xi(i: u32, j: u32, cap: u32) -> Self {
        GeneratorSpec {
            name: format!("xi{i}_{j}"),
            kind: GeneratorKind::DividedPower,
            cap,
            weighted: true,
            slot: Some((i, j)),
        }
    }

    pub fn is_pd(&self) -> bool {
        self.kind == GeneratorKind::DividedPower
    }
}

const DENSE_LIMIT: u64 = 1 << 22;

#[derive(Debug)]
enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

/// A commutative `Z/p^N`-algebra with a finite monomial basis.
///
/// Basis monomials are exponent tuples with `e_g < cap_g`, and, when a total
/// cap `W` is set, weighted exponents summing to less than `W`. Order is
/// graded: total degree first, then lexicographically descending tuples.
pub struct TruncatedAlgebra {
    modulus: Modulus,
    gens: Vec<GeneratorSpec>,
    weight_cap: Option<u32>,
    exps: Vec<u32>,
    positions: Vec<u64>,
    strides: Vec<u64>,
    lookup: Lookup,
    binom: Vec<Vec<u64>>,
}

impl fmt::Debug for TruncatedAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedAlgebra({}", self.modulus)?;
        for g in &self.gens {
            let k = if g.is_pd() { " pd" } else { "" };
            write!(f, ", {} cap {}{k}", g.name, g.cap)?;
        }
        if let Some(w) = self.weight_cap {
            write!(f, ", W={w}")?;
        }
        write!(f, ")")
    }
}

impl PartialEq for TruncatedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
            && self.gens == other.gens
            && self.weight_cap == other.weight_cap
    }
}

impl Eq for TruncatedAlgebra {}

impl TruncatedAlgebra {
    pub fn new(
        modulus: Modulus,
        gens: Vec<GeneratorSpec>,
        weight_cap: Option<u32>,
    ) -> Result<Arc<Self>> {
        for g in &gens {
            if g.cap == 0 {
                return Err(Error::Invalid(format!("generator {} has cap 0", g.name)));
            }
        }
        for (i, g) in gens.iter().enumerate() {
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Invalid(format!("duplicate generator {}", g.name)));
            }
        }
        if weight_cap == Some(0) {
            return Err(Error::Invalid("weight cap must be at least 1".into()));
        }
        let ng = gens.len();
        let mut strides = vec![1u64; ng];
        let mut total: u64 = 1;
        for g in (0..ng).rev() {
            strides[g] = total;
            total = total.saturating_mul(gens[g].cap as u64);
        }
        // Enumerate tuples under caps, then sort.
        let mut tuples: Vec<Vec<u32>> = vec![vec![]];
        for g in &gens {
            let mut next = Vec::new();
            for t in &tuples {
                for e in 0..g.cap {
                    let mut t2 = t.clone();
                    t2.push(e);
                    next.push(t2);
                }
            }
            tuples = next;
            if let Some(w) = weight_cap {
                tuples.retain(|t| {
                    t.iter()
                        .zip(&gens)
                        .filter(|(_, g)| g.weighted)
                        .map(|(&e, _)| e)
                        .sum::<u32>()
                        < w
                });
            }
        }
        tuples.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let positions: Vec<u64> = tuples
            .iter()
            .map(|t| t.iter().zip(&strides).map(|(&e, &s)| e as u64 * s).sum())
            .collect();
        let lookup = if total <= DENSE_LIMIT {
            let mut v = vec![u32::MAX; total as usize];
            for (i, &pos) in positions.iter().enumerate() {
                v[pos as usize] = i as u32;
            }
            Lookup::Dense(v)
        } else {
            Lookup::Sparse(
                positions
                    .iter()
                    .enumerate()
                    .map(|(i, &pos)| (pos, i as u32))
                    .collect(),
            )
        };
        let max_pd = gens
            .iter()
            .filter(|g| g.is_pd())
            .map(|g| g.cap)
            .max()
            .unwrap_or(1) as u64;
        let binom = (0..max_pd)
            .map(|a| {
                (0..=a)
                    .map(|b| modulus.reduce_big(&binomial_big(a, b)))
                    .collect()
            })
            .collect();
        Ok(Arc::new(TruncatedAlgebra {
            modulus,
            gens,
            weight_cap,
            exps: tuples.into_iter().flatten().collect(),
            positions,
            strides,
            lookup,
            binom,
        }))
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.gens
    }

    pub fn weight_cap(&self) -> Option<u32> {
        self.weight_cap
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn dim(&self) -> usize {
        self.positions.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// Exponent tuple of basis element `i`.
    pub fn exponents(&self, i: usize) -> &[u32] {
        let g = self.gens.len();
        &self.exps[i * g..(i + 1) * g]
    }

    /// Sum of exponents of PD generators.
    pub fn pd_weight(&self, i: usize) -> u32 {
        self.exponents(i)
            .iter()
            .zip(&self.gens)
            .filter(|(_, g)| g.is_pd())
            .map(|(&e, _)| e)
            .sum()
    }

    /// Sum of exponents of weighted generators.
    pub fn weighted_degree(&self, i: usize) -> u32 {
        self.exponents(i)
            .iter()
            .zip(&self.gens)
            .filter(|(_, g)| g.weighted)
            .map(|(&e, _)| e)
            .sum()
    }

    /// One more than the largest PD weight of a basis monomial.
    pub fn pd_weight_bound(&self) -> u32 {
        (0..self.dim()).map(|i| self.pd_weight(i)).max().unwrap_or(0) + 1
    }

    fn in_caps(&self, e: &[u32]) -> bool {
        if e.iter().zip(&self.gens).any(|(&x, g)| x >= g.cap) {
            return false;
        }
        match self.weight_cap {
            Some(w) => {
                e.iter()
                    .zip(&self.gens)
                    .filter(|(_, g)| g.weighted)
                    .map(|(&x, _)| x)
                    .sum::<u32>()
                    < w
            }
            None => true,
        }
    }

    fn lookup_pos(&self, pos: u64) -> Option<usize> {
        match &self.lookup {
            Lookup::Dense(v) => v
                .get(pos as usize)
                .copied()
                .filter(|&x| x != u32::MAX)
                .map(|x| x as usize),
            Lookup::Sparse(h) => h.get(&pos).map(|&x| x as usize),
        }
    }

    /// Basis index of an exponent tuple, if it survives truncation.
    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        if e.len() != self.gens.len() || !self.in_caps(e) {
            return None;
        }
        let pos = e.iter().zip(&self.strides).map(|(&x, &s)| x as u64 * s).sum();
        self.lookup_pos(pos)
    }

    /// Product of basis monomials `u * v` as `(index, coefficient)`.
    #[inline]
    pub fn basis_product(&self, u: usize, v: usize) -> Option<(usize, u64)> {
        let g = self.gens.len();
        let (eu, ev) = (&self.exps[u * g..(u + 1) * g], &self.exps[v * g..(v + 1) * g]);
        let mut coef = 1 % self.modulus.modulus();
        let mut w = 0;
        for k in 0..g {
            let s = eu[k] + ev[k];
            let gen = &self.gens[k];
            if s >= gen.cap {
                return None;
            }
            if gen.weighted {
                w += s;
            }
            if gen.kind == GeneratorKind::DividedPower && eu[k] > 0 && ev[k] > 0 {
                coef = self.modulus.mul(coef, self.binom[s as usize][eu[k] as usize]);
            }
        }
        if let Some(cap) = self.weight_cap {
            if w >= cap {
                return None;
            }
        }
        if coef == 0 {
            return None;
        }
        let idx = self.lookup_pos(self.positions[u] + self.positions[v])?;
        Some((idx, coef))
    }

    pub fn zero(self: &Arc<Self>) -> AlgebraElement {
        AlgebraElement {
            alg: self.clone(),
            c: vec![0; self.dim()],
        }
    }

    pub fn one(self: &Arc<Self>) -> AlgebraElement {
        self.constant(1)
    }

    pub fn constant(self: &Arc<Self>, c: i64) -> AlgebraElement {
        let mut z = self.zero();
        z.c[0] = self.modulus.reduce_i64(c);
        z
    }

    /// The basis monomial with the given exponents times `coef`; zero if
    /// truncated.
    pub fn monomial(self: &Arc<Self>, e: &[u32], coef: i64) -> AlgebraElement {
        let mut z = self.zero();
        if let Some(i) = self.index_of(e) {
            z.c[i] = self.modulus.reduce_i64(coef);
        }
        z
    }

    pub fn basis_element(self: &Arc<Self>, i: usize) -> AlgebraElement {
        let mut z = self.zero();
        z.c[i] = 1 % self.modulus.modulus();
        z
    }

    /// The generator itself (`x^[1]` for PD generators).
    pub fn generator(self: &Arc<Self>, g: usize) -> AlgebraElement {
        let mut e = vec![0; self.gens.len()];
        e[g] = 1;
        self.monomial(&e, 1)
    }

    pub fn generator_by_name(self: &Arc<Self>, name: &str) -> Result<AlgebraElement> {
        let g = self
            .generator_index(name)
            .ok_or_else(|| Error::Invalid(format!("unknown generator {name}")))?;
        Ok(self.generator(g))
    }

    pub fn from_coeffs(self: &Arc<Self>, c: Vec<u64>) -> Result<AlgebraElement> {
        if c.len() != self.dim() {
            return Err(Error::Shape(format!(
                "{} coefficients for an algebra of dimension {}",
                c.len(),
                self.dim()
            )));
        }
        let m = self.modulus;
        Ok(AlgebraElement {
            alg: self.clone(),
            c: c.into_iter().map(|x| m.reduce(x)).collect(),
        })
    }

    /// Formats basis monomial `i` like `3*T^2*x[2]` without coefficient.
    pub fn monomial_name(&self, i: usize) -> String {
        let parts: Vec<String> = self
            .exponents(i)
            .iter()
            .zip(&self.gens)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, g)| match (g.kind, e) {
                (GeneratorKind::DividedPower, _) => format!("{}[{e}]", g.name),
                (GeneratorKind::Polynomial, 1) => g.name.clone(),
                (GeneratorKind::Polynomial, _) => format!("{}^{e}", g.name),
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Same algebra with the modulus replaced (caps unchanged).
    pub fn with_modulus(&self, modulus: Modulus) -> Result<Arc<Self>> {
        TruncatedAlgebra::new(modulus, self.gens.clone(), self.weight_cap)
    }

    /// Generators that are not weighted, i.e. the base ring part.
    pub fn base_generators(&self) -> Vec<GeneratorSpec> {
        self.gens.iter().filter(|g| !g.weighted).cloned().collect()
    }

    /// The largest `j` among `ξ_{i,j}` slots.
    pub fn max_slot_level(&self) -> u32 {
        self.gens
            .iter()
            .filter_map(|g| g.slot.map(|(_, j)| j))
            .max()
            .unwrap_or(0)
    }
}

/// Truncated polynomial algebra; every spec must be polynomial.
pub fn make_poly_algebra(modulus: Modulus, specs: &[GeneratorSpec]) -> Result<Arc<TruncatedAlgebra>> {
    if let Some(g) = specs.iter().find(|g| g.is_pd()) {
        return Err(Error::Invalid(format!("{} is not a polynomial generator", g.name)));
    }
    TruncatedAlgebra::new(modulus, specs.to_vec(), None)
}

/// `R{ξ_1/d, …, ξ_n/d}` truncated at total PD weight `< w`.
pub fn make_pd_extension(
    r: &Arc<TruncatedAlgebra>,
    n: u32,
    w: u32,
) -> Result<Arc<TruncatedAlgebra>> {
    pd_level(r, n, 1, w)
}

/// `R^PD(m)`: generators `ξ_{i,j}/d`, `1 ≤ i ≤ n`, `1 ≤ j ≤ m`, ordered with
/// `j` outer.
pub fn pd_level(
    r: &Arc<TruncatedAlgebra>,
    n: u32,
    m: u32,
    w: u32,
) -> Result<Arc<TruncatedAlgebra>> {
    if w == 0 {
        return Err(Error::Invalid("weight cap must be at least 1".into()));
    }
    if r.weight_cap.is_some() || r.gens.iter().any(|g| g.weighted) {
        return Err(Error::Invalid("base already carries weighted generators".into()));
    }
    let mut gens = r.gens.clone();
    for j in 1..=m {
        for i in 1..=n {
            gens.push(GeneratorSpec::xi(i, j, w));
        }
    }
    TruncatedAlgebra::new(r.modulus, gens, if m == 0 || n == 0 { None } else { Some(w) })
}

/// Tensor product over the shared base generators. Weighted generators of
/// the right factor move to fresh `ξ` levels.
pub fn tensor_over_base(
    l: &Arc<TruncatedAlgebra>,
    r: &Arc<TruncatedAlgebra>,
) -> Result<Arc<TruncatedAlgebra>> {
    if l.modulus != r.modulus {
        return Err(Error::ModulusMismatch(l.modulus.to_string(), r.modulus.to_string()));
    }
    let (bl, br) = (l.base_generators(), r.base_generators());
    if bl != br {
        return Err(Error::Invalid("factors do not share the same base generators".into()));
    }
    let wl: Vec<&GeneratorSpec> = l.gens.iter().filter(|g| g.weighted).collect();
    let wr: Vec<&GeneratorSpec> = r.gens.iter().filter(|g| g.weighted).collect();
    let cap = match (l.weight_cap, r.weight_cap) {
        (a, b) if a == b => a,
        (a, None) if wr.is_empty() => a,
        (None, b) if wl.is_empty() => b,
        (a, b) => {
            return Err(Error::Invalid(format!(
                "incompatible total weight caps {a:?} and {b:?}"
            )))
        }
    };
    let shift = l.max_slot_level();
    let mut gens = bl;
    gens.extend(wl.into_iter().cloned());
    for g in wr {
        let mut g = g.clone();
        if let Some((i, j)) = g.slot {
            g = GeneratorSpec::xi(i, j + shift, g.cap);
        }
        while gens.iter().any(|h| h.name == g.name) {
            g.name.push('\'');
        }
        gens.push(g);
    }
    TruncatedAlgebra::new(l.modulus, gens, cap)
}

/// An element of a [`TruncatedAlgebra`].
#[derive(Clone)]
pub struct AlgebraElement {
    alg: Arc<TruncatedAlgebra>,
    c: Vec<u64>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && same_algebra(&self.alg, &other.alg)
    }
}

impl Eq for AlgebraElement {}

pub fn same_algebra(a: &Arc<TruncatedAlgebra>, b: &Arc<TruncatedAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl AlgebraElement {
    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c[i]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn constant_term(&self) -> u64 {
        self.c[0]
    }

    fn check(&self, other: &Self) {
        assert!(
            same_algebra(&self.alg, &other.alg),
            "algebra mismatch: {:?} vs {:?}",
            self.alg,
            other.alg
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let m = self.alg.modulus;
        AlgebraElement {
            alg: self.alg.clone(),
            c: self.c.iter().zip(&other.c).map(|(&a, &b)| m.add(a, b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        let m = self.alg.modulus;
        AlgebraElement {
            alg: self.alg.clone(),
            c: self.c.iter().zip(&other.c).map(|(&a, &b)| m.sub(a, b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        let m = self.alg.modulus;
        AlgebraElement {
            alg: self.alg.clone(),
            c: self.c.iter().map(|&a| m.neg(a)).collect(),
        }
    }

    pub fn scale(&self, k: u64) -> Self {
        let m = self.alg.modulus;
        let k = m.reduce(k);
        AlgebraElement {
            alg: self.alg.clone(),
            c: self.c.iter().map(|&a| m.mul(a, k)).collect(),
        }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        self.scale(self.alg.modulus.reduce_i64(k))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let alg = &self.alg;
        let m = alg.modulus;
        let mut out = vec![0u64; alg.dim()];
        let nz: Vec<(usize, u64)> = other
            .c
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, &x)| (i, x))
            .collect();
        for (u, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(v, b) in &nz {
                if let Some((w, k)) = alg.basis_product(u, v) {
                    out[w] = m.add(out[w], m.mul(m.mul(a, b), k));
                }
            }
        }
        AlgebraElement {
            alg: alg.clone(),
            c: out,
        }
    }

    /// `self * basis_i`.
    pub fn mul_basis(&self, i: usize) -> Self {
        let alg = &self.alg;
        let m = alg.modulus;
        let mut out = vec![0u64; alg.dim()];
        for (u, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if let Some((w, k)) = alg.basis_product(u, i) {
                out[w] = m.add(out[w], m.mul(a, k));
            }
        }
        AlgebraElement {
            alg: alg.clone(),
            c: out,
        }
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut r = self.alg.one();
        for _ in 0..e {
            if r.is_zero() {
                break;
            }
            r = r.mul(self);
        }
        r
    }

    /// Matrix of multiplication by `self` on the monomial basis.
    pub fn multiplication_matrix(&self) -> ScalarMatrix {
        let b = self.alg.dim();
        let mut out = ScalarMatrix::zeros(b, b, self.alg.modulus);
        for t in 0..b {
            let col = self.mul_basis(t);
            for (s, &x) in col.c.iter().enumerate() {
                if x != 0 {
                    out.set(s, t, x);
                }
            }
        }
        out
    }

    /// Reduce coefficients to a lower precision `N'`.
    pub fn support(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.c.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x))
    }

    /// True when every coefficient is divisible by `p^e`.
    pub fn divisible_by_p_pow(&self, e: u32) -> bool {
        let pe = self.alg.modulus.p().pow(e);
        e == 0 || self.c.iter().all(|&x| x % pe == 0)
    }

    /// Every coefficient reduced modulo `p^e` (as canonical lifts).
    pub fn reduce_mod_p_pow(&self, e: u32) -> Vec<u64> {
        let pe = self.alg.modulus.p().pow(e.min(self.alg.modulus.precision()));
        self.c.iter().map(|&x| x % pe).collect()
    }

    /// Equality modulo `p^e`.
    pub fn eq_mod_p_pow(&self, other: &Self, e: u32) -> bool {
        self.check(other);
        self.reduce_mod_p_pow(e) == other.reduce_mod_p_pow(e)
    }

    /// Whether the element lies in the ideal spanned by monomials with a
    /// positive PD exponent.
    pub fn in_pd_ideal(&self) -> bool {
        self.support().all(|(i, _)| self.alg.pd_weight(i) > 0)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, x) in self.support() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let name = self.alg.monomial_name(i);
            if name == "1" {
                write!(f, "{x}")?;
            } else if x == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{x}*{name}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn big_mod(m: Modulus, x: &BigUint) -> u64 {
    m.reduce_big(x)
}

/// `(am)! / (m! (a!)^m)`, the coefficient of `(x^[a])^[m]`.
fn pd_of_pd_coeff(a: u64, m: u64) -> BigUint {
    let num = factorial_big(a * m);
    let den = factorial_big(m) * factorial_big(a).pow(m as u32);
    num / den
}

/// `(am)! / (a!)^m`, the coefficient of `(x^[a])^m`.
fn pd_power_coeff(a: u64, m: u64) -> BigUint {
    factorial_big(a * m) / factorial_big(a).pow(m as u32)
}

/// `(c * b_u)^[j]` for a single basis monomial `b_u` in the PD ideal.
fn monomial_divided_power(alg: &Arc<TruncatedAlgebra>, u: usize, c: u64, j: u32) -> AlgebraElement {
    if j == 0 {
        return alg.one();
    }
    let m = alg.modulus;
    let e = alg.exponents(u);
    let first_pd = e
        .iter()
        .zip(&alg.gens)
        .position(|(&x, g)| x > 0 && g.is_pd())
        .expect("monomial lies in the PD ideal");
    let mut coef = BigUint::from(1u32);
    let mut target = Vec::with_capacity(e.len());
    for (k, (&x, g)) in e.iter().zip(&alg.gens).enumerate() {
        target.push(x * j);
        if x == 0 || !g.is_pd() {
            continue;
        }
        if k == first_pd {
            coef *= pd_of_pd_coeff(x as u64, j as u64);
        } else {
            coef *= pd_power_coeff(x as u64, j as u64);
        }
    }
    let k = m.mul(big_mod(m, &coef), m.pow(c, j as u64));
    let mut out = alg.zero();
    if let Some(i) = alg.index_of(&target) {
        out.c[i] = k;
    }
    out
}

/// Divided powers `x^[0..=mmax]` of an element of the PD ideal.
pub fn pd_divided_powers(x: &AlgebraElement, mmax: u32) -> Result<Vec<AlgebraElement>> {
    if x.constant_term() != 0 {
        return Err(Error::Invalid("divided power of an element with nonzero constant term".into()));
    }
    if !x.in_pd_ideal() {
        return Err(Error::Invalid(format!(
            "{x} is not in the ideal generated by the divided-power generators"
        )));
    }
    let alg = x.algebra();
    let mut acc: Vec<AlgebraElement> = (0..=mmax)
        .map(|k| if k == 0 { alg.one() } else { alg.zero() })
        .collect();
    for (u, c) in x.support() {
        let pows: Vec<AlgebraElement> = (0..=mmax)
            .map(|j| monomial_divided_power(alg, u, c, j))
            .collect();
        let mut next = Vec::with_capacity(acc.len());
        for k in 0..=mmax as usize {
            let mut s = alg.zero();
            for j in 0..=k {
                if pows[j].is_zero() || acc[k - j].is_zero() {
                    continue;
                }
                s = s.add(&pows[j].mul(&acc[k - j]));
            }
            next.push(s);
        }
        acc = next;
    }
    Ok(acc)
}

/// `x^[m]` by the multinomial PD expansion.
pub fn pd_divided_power(x: &AlgebraElement, m: u32) -> Result<AlgebraElement> {
    Ok(pd_divided_powers(x, m)?.pop().expect("nonempty"))
}

/// A unital ring map, stored as its matrix on monomial bases.
#[derive(Clone, Debug)]
pub struct RingMap {
    source: Arc<TruncatedAlgebra>,
    target: Arc<TruncatedAlgebra>,
    images: Vec<AlgebraElement>,
    matrix: ScalarMatrix,
}

impl RingMap {
    /// The map determined by generator images. Polynomial generators may go
    /// anywhere; PD generators must go into the PD ideal. Fails unless every
    /// truncated monomial is sent to zero.
    pub fn from_generator_images(
        source: &Arc<TruncatedAlgebra>,
        target: &Arc<TruncatedAlgebra>,
        images: Vec<AlgebraElement>,
    ) -> Result<RingMap> {
        if source.modulus != target.modulus {
            return Err(Error::ModulusMismatch(
                source.modulus.to_string(),
                target.modulus.to_string(),
            ));
        }
        if images.len() != source.ngens() {
            return Err(Error::Shape(format!(
                "{} images for {} generators",
                images.len(),
                source.ngens()
            )));
        }
        for im in &images {
            if !same_algebra(im.algebra(), target) {
                return Err(Error::Invalid("generator image lies in the wrong algebra".into()));
            }
        }
        let bound = target.pd_weight_bound();
        // tables[g][k] = image of g^k or g^[k], for k below max(cap, bound).
        let mut tables: Vec<Vec<AlgebraElement>> = Vec::new();
        for (g, im) in source.gens.iter().zip(&images) {
            let top = g.cap.max(bound);
            let t = match g.kind {
                GeneratorKind::Polynomial => {
                    let mut v = vec![target.one()];
                    for k in 1..=g.cap {
                        let next = v[k as usize - 1].mul(im);
                        v.push(next);
                    }
                    if !v[g.cap as usize].is_zero() {
                        return Err(Error::IllDefined(format!(
                            "{}^{} must vanish but maps to {}",
                            g.name, g.cap, v[g.cap as usize]
                        )));
                    }
                    v
                }
                GeneratorKind::DividedPower => {
                    let v = pd_divided_powers(im, top).map_err(|e| {
                        Error::IllDefined(format!("image of {}: {e}", g.name))
                    })?;
                    for k in g.cap..=top {
                        if !v[k as usize].is_zero() {
                            return Err(Error::IllDefined(format!(
                                "{}[{k}] must vanish but maps to {}",
                                g.name, v[k as usize]
                            )));
                        }
                    }
                    v
                }
            };
            tables.push(t);
        }
        if let Some(w) = source.weight_cap {
            let weighted: Vec<usize> = (0..source.ngens()).filter(|&g| source.gens[g].weighted).collect();
            let mut tuple = vec![0u32; weighted.len()];
            check_weighted_tuples(source, &tables, &weighted, &mut tuple, 0, w, bound, target)?;
        }
        // Images of basis monomials, built from smaller ones.
        let b = source.dim();
        let mut basis_images: Vec<AlgebraElement> = Vec::with_capacity(b);
        for i in 0..b {
            let e = source.exponents(i);
            match e.iter().position(|&x| x > 0) {
                None => basis_images.push(target.one()),
                Some(g) => {
                    let mut rest = e.to_vec();
                    rest[g] = 0;
                    let j = source.index_of(&rest).expect("sub-monomial survives truncation");
                    let im = tables[g][e[g] as usize].mul(&basis_images[j]);
                    basis_images.push(im);
                }
            }
        }
        let mut matrix = ScalarMatrix::zeros(target.dim(), b, target.modulus);
        for (s, im) in basis_images.iter().enumerate() {
            for (t, x) in im.support() {
                matrix.set(t, s, x);
            }
        }
        Ok(RingMap {
            source: source.clone(),
            target: target.clone(),
            images,
            matrix,
        })
    }

    pub fn identity(a: &Arc<TruncatedAlgebra>) -> RingMap {
        let images = (0..a.ngens()).map(|g| a.generator(g)).collect();
        RingMap {
            source: a.clone(),
            target: a.clone(),
            images,
            matrix: ScalarMatrix::identity(a.dim(), a.modulus),
        }
    }

    pub fn source(&self) -> &Arc<TruncatedAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TruncatedAlgebra> {
        &self.target
    }

    pub fn generator_images(&self) -> &[AlgebraElement] {
        &self.images
    }

    pub fn matrix(&self) -> &ScalarMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &AlgebraElement) -> AlgebraElement {
        assert!(same_algebra(x.algebra(), &self.source), "ring map applied outside its source");
        let c = self.matrix.mul_vec(x.coeffs());
        AlgebraElement {
            alg: self.target.clone(),
            c,
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &RingMap) -> Result<RingMap> {
        if !same_algebra(&self.target, &other.source) {
            return Err(Error::Invalid("ring maps are not composable".into()));
        }
        Ok(RingMap {
            source: self.source.clone(),
            target: other.target.clone(),
            images: self.images.iter().map(|x| other.apply(x)).collect(),
            matrix: other.matrix.mul(&self.matrix)?,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn check_weighted_tuples(
    source: &TruncatedAlgebra,
    tables: &[Vec<AlgebraElement>],
    weighted: &[usize],
    tuple: &mut Vec<u32>,
    pos: usize,
    w: u32,
    bound: u32,
    target: &Arc<TruncatedAlgebra>,
) -> Result<()> {
    let sum: u32 = tuple.iter().sum();
    if pos == weighted.len() {
        if sum >= w && sum < bound.max(w + 1) {
            let mut prod = target.one();
            for (k, &g) in weighted.iter().enumerate() {
                prod = prod.mul(&tables[g][tuple[k] as usize]);
                if prod.is_zero() {
                    return Ok(());
                }
            }
            return Err(Error::IllDefined(format!(
                "weighted monomial {:?} must vanish but maps to {prod}",
                tuple
            )));
        }
        return Ok(());
    }
    let g = weighted[pos];
    for e in 0..source.gens[g].cap {
        if sum + e >= bound.max(w + 1) {
            break;
        }
        tuple[pos] = e;
        check_weighted_tuples(source, tables, weighted, tuple, pos + 1, w, bound, target)?;
    }
    tuple[pos] = 0;
    Ok(())
}

/// A matrix with entries in a truncated algebra, acting on column vectors:
/// `rows` is the target rank.
#[derive(Clone)]
pub struct FreeModuleMap {
    alg: Arc<TruncatedAlgebra>,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl PartialEq for FreeModuleMap {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
            && same_algebra(&self.alg, &other.alg)
    }
}

impl Eq for FreeModuleMap {}

impl fmt::Debug for FreeModuleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {:?}", self.rows, self.cols, self.alg)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.entry(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl FreeModuleMap {
    pub fn zeros(alg: &Arc<TruncatedAlgebra>, rows: usize, cols: usize) -> Self {
        FreeModuleMap {
            alg: alg.clone(),
            rows,
            cols,
            data: vec![0; rows * cols * alg.dim()],
        }
    }

    pub fn identity(alg: &Arc<TruncatedAlgebra>, n: usize) -> Self {
        let mut f = Self::zeros(alg, n, n);
        for i in 0..n {
            f.set(i, i, &alg.one());
        }
        f
    }

    /// Builds from a row-major list of entries.
    pub fn from_entries(
        alg: &Arc<TruncatedAlgebra>,
        rows: usize,
        cols: usize,
        entries: &[AlgebraElement],
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for {rows}x{cols}", entries.len())));
        }
        let mut f = Self::zeros(alg, rows, cols);
        for (k, e) in entries.iter().enumerate() {
            if !same_algebra(e.algebra(), alg) {
                return Err(Error::Invalid("entry lies in the wrong algebra".into()));
            }
            f.set(k / cols.max(1), k % cols.max(1), e);
        }
        Ok(f)
    }

    /// Scalar matrix viewed over the algebra.
    pub fn from_scalar(alg: &Arc<TruncatedAlgebra>, s: &ScalarMatrix) -> Self {
        let mut f = Self::zeros(alg, s.rows(), s.cols());
        let b = alg.dim();
        for i in 0..s.rows() {
            for j in 0..s.cols() {
                f.data[(i * s.cols() + j) * b] = alg.modulus.reduce(s.get(i, j));
            }
        }
        f
    }

    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn slot(&self, i: usize, j: usize) -> &[u64] {
        let b = self.alg.dim();
        let k = (i * self.cols + j) * b;
        &self.data[k..k + b]
    }

    pub fn entry(&self, i: usize, j: usize) -> AlgebraElement {
        AlgebraElement {
            alg: self.alg.clone(),
            c: self.slot(i, j).to_vec(),
        }
    }

    pub fn entry_is_zero(&self, i: usize, j: usize) -> bool {
        self.slot(i, j).iter().all(|&x| x == 0)
    }

    pub fn set(&mut self, i: usize, j: usize, e: &AlgebraElement) {
        let b = self.alg.dim();
        let k = (i * self.cols + j) * b;
        self.data[k..k + b].copy_from_slice(&e.c);
    }

    pub fn add_to(&mut self, i: usize, j: usize, e: &AlgebraElement) {
        let b = self.alg.dim();
        let m = self.alg.modulus;
        let k = (i * self.cols + j) * b;
        for (x, &y) in self.data[k..k + b].iter_mut().zip(&e.c) {
            *x = m.add(*x, y);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !same_algebra(&self.alg, &other.alg) {
            return Err(Error::Invalid("maps over different algebras".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape("cannot add maps of different shapes".into()));
        }
        let m = self.alg.modulus;
        Ok(FreeModuleMap {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| m.add(a, b)).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let m = self.alg.modulus;
        FreeModuleMap {
            data: self.data.iter().map(|&a| m.neg(a)).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, k: i64) -> Self {
        let m = self.alg.modulus;
        let k = m.reduce_i64(k);
        FreeModuleMap {
            data: self.data.iter().map(|&a| m.mul(a, k)).collect(),
            ..self.clone()
        }
    }

    /// Multiplies every entry by an algebra element.
    pub fn scale_by(&self, e: &AlgebraElement) -> Self {
        let mut out = Self::zeros(&self.alg, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.entry_is_zero(i, j) {
                    out.set(i, j, &self.entry(i, j).mul(e));
                }
            }
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let alg = &self.alg;
        let m = alg.modulus;
        let b = alg.dim();
        let mut out = Self::zeros(alg, self.rows, other.cols);
        let oc = other.cols;
        let width = oc * b;
        crate::par::for_each_chunk(&mut out.data, width.max(1), |i, row| {
            if width == 0 {
                return;
            }
            for k in 0..self.cols {
                let a = self.slot(i, k);
                if a.iter().all(|&x| x == 0) {
                    continue;
                }
                for j in 0..oc {
                    let c = other.slot(k, j);
                    if c.iter().all(|&x| x == 0) {
                        continue;
                    }
                    let dst = &mut row[j * b..(j + 1) * b];
                    for (u, &x) in a.iter().enumerate() {
                        if x == 0 {
                            continue;
                        }
                        for (v, &y) in c.iter().enumerate() {
                            if y == 0 {
                                continue;
                            }
                            if let Some((w, k)) = alg.basis_product(u, v) {
                                dst[w] = m.add(dst[w], m.mul(m.mul(x, y), k));
                            }
                        }
                    }
                }
            }
        });
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(&self.alg, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, &self.entry(i, j));
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other` over the algebra; row index
    /// `i * other.rows + k`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(&self.alg, rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.entry_is_zero(i, j) {
                    continue;
                }
                let a = self.entry(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        if other.entry_is_zero(k, l) {
                            continue;
                        }
                        out.set(i * other.rows + k, j * other.cols + l, &a.mul(&other.entry(k, l)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(alg: &Arc<TruncatedAlgebra>, blocks: &[&FreeModuleMap]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(alg, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &FreeModuleMap) {
        let b = self.alg.dim();
        for i in 0..block.rows {
            for j in 0..block.cols {
                let src = block.slot(i, j);
                let k = ((r0 + i) * self.cols + c0 + j) * b;
                self.data[k..k + b].copy_from_slice(src);
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(&self.alg, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.set(i, j, &self.entry(r0 + i, c0 + j));
            }
        }
        out
    }

    /// Applies a ring map to every entry.
    pub fn map_entries(&self, f: &RingMap) -> Result<Self> {
        if !same_algebra(&self.alg, f.source()) {
            return Err(Error::Invalid("ring map source does not match".into()));
        }
        let mut out = Self::zeros(f.target(), self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.entry_is_zero(i, j) {
                    out.set(i, j, &f.apply(&self.entry(i, j)));
                }
            }
        }
        Ok(out)
    }

    /// The `Z/p^N`-linear map on `(rank index) * dim + (basis index)`.
    pub fn restrict_scalars(&self) -> ScalarMatrix {
        let b = self.alg.dim();
        let alg = &self.alg;
        let m = alg.modulus;
        let mut out = ScalarMatrix::zeros(self.rows * b, self.cols * b, m);
        let cols_total = self.cols * b;
        let this = &*self;
        crate::par::for_each_chunk(out.data_mut(), cols_total.max(1) * b.max(1), |i, block| {
            if cols_total == 0 {
                return;
            }
            for j in 0..this.cols {
                let e = this.slot(i, j);
                for (u, &x) in e.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for t in 0..b {
                        if let Some((w, k)) = alg.basis_product(u, t) {
                            let at = w * cols_total + j * b + t;
                            block[at] = m.add(block[at], m.mul(x, k));
                        }
                    }
                }
            }
        });
        out
    }
}
