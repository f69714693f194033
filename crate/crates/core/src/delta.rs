//! δ-structures and Frobenius lifts on truncated algebras.
//!
//! δ is only determined modulo `p^{N-1}` on `Z/p^N`; every δ-dependent
//! comparison in this module is made at that precision.

use crate::algebra::{pd_divided_powers, same_algebra, AlgebraElement, GeneratorKind, RingMap, TruncatedAlgebra};
use crate::coefficients::{binomial_big, factorial_big, Modulus};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rand::Rng;
use std::sync::Arc;

/// Which prism the truncated model lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrismMode {
    /// `d = p`.
    Crystalline,
    /// `d = [p]_q`, with `(q-1)^K = 0`.
    QDeRham { k: u32 },
}

/// A δ-structure on a truncated algebra, recorded through δ of every
/// generator power and the Frobenius lift it determines.
#[derive(Clone, Debug)]
pub struct DeltaStructure {
    alg: Arc<TruncatedAlgebra>,
    /// `powers[g][k]` is δ(g^k) or δ(g^[k]).
    powers: Vec<Vec<AlgebraElement>>,
    phi: RingMap,
}

/// `C(p, i) / p` as a residue.
fn binom_over_p(p: u64, i: u64, m: Modulus) -> u64 {
    m.reduce_big(&(binomial_big(p, i) / BigUint::from(p)))
}

/// δ(c) = (c - c^p)/p for the canonical lift of a base scalar.
pub fn delta_scalar(c: u64, m: Modulus) -> u64 {
    let p = m.p();
    let c = BigInt::from(c);
    let v: BigInt = (&c - c.pow(p as u32)) / BigInt::from(p);
    let md = BigInt::from(m.modulus());
    let r = ((v % &md) + &md) % &md;
    r.to_u64().expect("reduced residue fits")
}

/// The δ-rule for a sum, given δ of both summands.
fn delta_sum(
    x: &AlgebraElement,
    dx: &AlgebraElement,
    y: &AlgebraElement,
    dy: &AlgebraElement,
) -> AlgebraElement {
    let alg = x.algebra();
    let m = alg.modulus();
    let p = m.p();
    let mut out = dx.add(dy);
    let xp: Vec<AlgebraElement> = (0..p).map(|i| x.pow(i)).collect();
    let yp: Vec<AlgebraElement> = (0..=p).map(|i| y.pow(i)).collect();
    for i in 1..p {
        let c = binom_over_p(p, i, m);
        let term = xp[i as usize].mul(&yp[(p - i) as usize]).scale(c);
        out = out.sub(&term);
    }
    out
}

/// The δ-rule for a product.
fn delta_product(
    x: &AlgebraElement,
    dx: &AlgebraElement,
    y: &AlgebraElement,
    dy: &AlgebraElement,
) -> AlgebraElement {
    let p = x.algebra().modulus().p();
    x.pow(p)
        .mul(dy)
        .add(&y.pow(p).mul(dx))
        .add(&dx.mul(dy).scale(p))
}

impl DeltaStructure {
    /// δ-structure on an algebra of polynomial generators from δ of each
    /// generator. The Frobenius `g ↦ g^p + p δ(g)` must respect the caps.
    pub fn new(alg: &Arc<TruncatedAlgebra>, generator_deltas: Vec<AlgebraElement>) -> Result<Self> {
        if generator_deltas.len() != alg.ngens() {
            return Err(Error::Shape(format!(
                "{} δ-images for {} generators",
                generator_deltas.len(),
                alg.ngens()
            )));
        }
        if let Some(g) = alg.generators().iter().find(|g| g.is_pd()) {
            return Err(Error::Invalid(format!(
                "generator {} is divided-power; use the crystalline PD model",
                g.name
            )));
        }
        let p = alg.modulus().p();
        let mut powers = Vec::new();
        let mut images = Vec::new();
        for (g, dg) in generator_deltas.iter().enumerate() {
            if !same_algebra(dg.algebra(), alg) {
                return Err(Error::Invalid("δ-image lies in the wrong algebra".into()));
            }
            let x = alg.generator(g);
            images.push(x.pow(p).add(&dg.scale(p)));
            powers.push(checked_power_deltas(&x, dg, &alg.generators()[g].name, alg.generators()[g].cap)?);
        }
        let phi = RingMap::from_generator_images(alg, alg, images)?;
        Ok(DeltaStructure {
            alg: alg.clone(),
            powers,
            phi,
        })
    }

    /// δ = 0 on every generator.
    pub fn trivial(alg: &Arc<TruncatedAlgebra>) -> Result<Self> {
        Self::new(alg, vec![alg.zero(); alg.ngens()])
    }

    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    pub fn frobenius_map(&self) -> &RingMap {
        &self.phi
    }

    /// δ of generator `g`.
    pub fn generator_delta(&self, g: usize) -> &AlgebraElement {
        &self.powers[g][1]
    }

    fn monomial_delta(&self, u: usize) -> (AlgebraElement, AlgebraElement) {
        let alg = &self.alg;
        let e = alg.exponents(u);
        let mut x = alg.one();
        let mut dx = alg.zero();
        for (g, &k) in e.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let mut ex = vec![0; e.len()];
            ex[g] = k;
            let y = alg.monomial(&ex, 1);
            let dy = &self.powers[g][k as usize];
            dx = delta_product(&x, &dx, &y, dy);
            x = x.mul(&y);
        }
        (x, dx)
    }

    /// δ(x), valid modulo `p^{N-1}`.
    pub fn delta(&self, x: &AlgebraElement) -> AlgebraElement {
        assert!(same_algebra(x.algebra(), &self.alg), "δ applied outside its algebra");
        let alg = &self.alg;
        let m = alg.modulus();
        let mut acc = alg.zero();
        let mut dacc = alg.zero();
        for (u, c) in x.support() {
            let (b, db) = self.monomial_delta(u);
            let cst = alg.constant(c as i64);
            let dc = alg.constant(delta_scalar(c, m) as i64);
            let t = b.scale(c);
            let dt = delta_product(&cst, &dc, &b, &db);
            dacc = delta_sum(&acc, &dacc, &t, &dt);
            acc = acc.add(&t);
        }
        dacc
    }

    pub fn frobenius(&self, x: &AlgebraElement) -> AlgebraElement {
        self.phi.apply(x)
    }

    /// γ_p(x) = -δ(x)/(p-1)!, valid modulo `p^{N-1}`.
    pub fn gamma_p(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        let m = self.alg.modulus();
        let f = m.reduce_big(&factorial_big(m.p() - 1));
        let inv = m.inverse(f)?;
        Ok(self.delta(x).neg().scale(inv))
    }
}

/// δ(x^k) for `k < cap` by repeated use of the product rule.
fn poly_power_deltas(x: &AlgebraElement, dx: &AlgebraElement, cap: u32) -> Vec<AlgebraElement> {
    let alg = x.algebra();
    let mut out = vec![alg.zero(), dx.clone()];
    let mut pow = x.clone();
    for _ in 2..cap.max(2) {
        let prev = out.last().unwrap().clone();
        out.push(delta_product(&pow, &prev, x, dx));
        pow = pow.mul(x);
    }
    out.truncate(cap.max(1) as usize);
    if out.len() < 2 {
        out.push(dx.clone());
    }
    out
}

/// Like [`poly_power_deltas`], but also requires δ(x^cap) ≡ 0 mod p^{N-1} so
/// that the truncation is compatible with δ.
fn checked_power_deltas(
    x: &AlgebraElement,
    dx: &AlgebraElement,
    name: &str,
    cap: u32,
) -> Result<Vec<AlgebraElement>> {
    let n = x.algebra().modulus().precision();
    let mut all = poly_power_deltas(x, dx, cap + 1);
    let top = all.pop().expect("nonempty");
    if all.len() as u32 == cap && !top.eq_mod_p_pow(&x.algebra().zero(), n - 1) {
        return Err(Error::IllDefined(format!(
            "δ({name}^{cap}) = {top} does not vanish modulo p^{}",
            n - 1
        )));
    }
    all.truncate(cap.max(2) as usize);
    Ok(all)
}

/// Outcome of [`check_delta_axioms`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub trials: usize,
    /// First failing identity with its witness, if any.
    pub counterexample: Option<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

pub fn random_element<R: Rng>(alg: &Arc<TruncatedAlgebra>, rng: &mut R) -> AlgebraElement {
    let m = alg.modulus().modulus();
    let c = (0..alg.dim()).map(|_| rng.gen_range(0..m)).collect();
    alg.from_coeffs(c).expect("length matches")
}

/// Random element of the PD ideal (no constant or pure base part).
pub fn random_ideal_element<R: Rng>(alg: &Arc<TruncatedAlgebra>, rng: &mut R) -> AlgebraElement {
    let m = alg.modulus().modulus();
    let c = (0..alg.dim())
        .map(|i| if alg.pd_weight(i) > 0 { rng.gen_range(0..m) } else { 0 })
        .collect();
    alg.from_coeffs(c).expect("length matches")
}

/// Checks the sum and product rules for δ, multiplicativity of φ, φ against
/// `x^p + pδ(x)`, and `φ(x) ≡ x^p mod p` on random pairs.
pub fn check_delta_axioms<R: Rng>(d: &DeltaStructure, trials: usize, rng: &mut R) -> AxiomReport {
    let alg = &d.alg;
    let m = alg.modulus();
    let p = m.p();
    let n = m.precision();
    let mut pairs: Vec<(AlgebraElement, AlgebraElement)> = vec![
        (alg.zero(), alg.one()),
        (alg.one(), alg.one()),
    ];
    for _ in 0..trials {
        pairs.push((random_element(alg, rng), random_element(alg, rng)));
    }
    for (x, y) in &pairs {
        let (dx, dy) = (d.delta(x), d.delta(y));
        let lhs = d.delta(&x.add(y));
        if !lhs.eq_mod_p_pow(&delta_sum(x, &dx, y, &dy), n - 1) {
            return fail(pairs.len(), "δ(x+y)", x, y);
        }
        let lhs = d.delta(&x.mul(y));
        if !lhs.eq_mod_p_pow(&delta_product(x, &dx, y, &dy), n - 1) {
            return fail(pairs.len(), "δ(xy)", x, y);
        }
        if !lhs.eq_mod_p_pow(&d.delta(&y.mul(x)), n - 1) || !d.delta(&x.mul(&alg.one())).eq_mod_p_pow(&dx, n - 1) {
            return fail(pairs.len(), "δ(x·1)", x, y);
        }
        let (fx, fy) = (d.frobenius(x), d.frobenius(y));
        if !d.frobenius(&x.mul(y)).eq_mod_p_pow(&fx.mul(&fy), n - 1) {
            return fail(pairs.len(), "φ(xy)", x, y);
        }
        if fx != x.pow(p).add(&dx.scale(p)) {
            return fail(pairs.len(), "φ(x) = x^p + pδ(x)", x, y);
        }
        if !fx.eq_mod_p_pow(&x.pow(p), 1) {
            return fail(pairs.len(), "φ(x) ≡ x^p mod p", x, y);
        }
    }
    AxiomReport {
        trials: pairs.len(),
        counterexample: None,
    }
}

fn fail(trials: usize, what: &str, x: &AlgebraElement, y: &AlgebraElement) -> AxiomReport {
    AxiomReport {
        trials,
        counterexample: Some(format!("{what} fails at x = {x}, y = {y}")),
    }
}

/// δ(ξ_i) = Σ_{j=1}^{p-1} (C(p,j)/p) ξ_i^j T_i^{p-j} + f_i(T+ξ) - f_i(T).
///
/// `t` and `xi` are the generator indices of the `T`'s and `ξ`'s in `alg`;
/// `f` are the δ-images of the `T`'s written in `alg`.
pub fn delta_xi(
    alg: &Arc<TruncatedAlgebra>,
    i: usize,
    t: &[usize],
    xi: &[usize],
    f: &[AlgebraElement],
) -> Result<AlgebraElement> {
    if t.len() != xi.len() || t.len() != f.len() || i >= t.len() {
        return Err(Error::Shape("mismatched T, ξ and f lists".into()));
    }
    let m = alg.modulus();
    let p = m.p();
    let ti = alg.generator(t[i]);
    let x = alg.generator(xi[i]);
    let mut out = alg.zero();
    for j in 1..p {
        let c = binom_over_p(p, j, m);
        out = out.add(&x.pow(j).mul(&ti.pow(p - j)).scale(c));
    }
    // f_i(T + ξ) by substituting monomial by monomial.
    let shifted: Vec<AlgebraElement> = t
        .iter()
        .zip(xi)
        .map(|(&a, &b)| alg.generator(a).add(&alg.generator(b)))
        .collect();
    let fi = &f[i];
    let mut sub = alg.zero();
    for (u, c) in fi.support() {
        let e = alg.exponents(u);
        if e.iter().enumerate().any(|(g, &k)| k > 0 && !t.contains(&g)) {
            return Err(Error::Invalid("f must be a polynomial in the T's".into()));
        }
        let mut term = alg.constant(c as i64);
        for (k, &g) in t.iter().enumerate() {
            term = term.mul(&shifted[k].pow(e[g] as u64));
        }
        sub = sub.add(&term);
    }
    Ok(out.add(&sub).sub(fi))
}

/// Index bookkeeping for the PD model `R{y_1, …, y_n}` with `y_i = ξ_i/p`.
fn pd_pairs(rpd: &Arc<TruncatedAlgebra>, base: &Arc<TruncatedAlgebra>) -> Result<Vec<(usize, usize)>> {
    let n = base.ngens();
    let gens = rpd.generators();
    if gens.len() != 2 * n || gens[..n] != *base.generators() {
        return Err(Error::Invalid(
            "PD algebra must be the base followed by one ξ per base generator".into(),
        ));
    }
    let mut pairs = Vec::new();
    for (i, g) in gens[n..].iter().enumerate() {
        if g.kind != GeneratorKind::DividedPower || g.slot != Some((i as u32 + 1, 1)) {
            return Err(Error::Invalid(format!("{} is not ξ_{}", g.name, i + 1)));
        }
        pairs.push((i, n + i));
    }
    Ok(pairs)
}

/// `φ(ξ_i/p)/p` in the crystalline PD model:
/// `p^{p-2} p! y^[p] + Σ_j (C(p,j)/p) p^{j-1} j! y^[j] T^{p-j}
///  + Σ_{|m|≥1} p^{|m|-1} m! D^{(m)}f_i · y^[m]`.
fn frobenius_over_p(
    rpd: &Arc<TruncatedAlgebra>,
    base: &DeltaStructure,
    pairs: &[(usize, usize)],
    i: usize,
) -> AlgebraElement {
    let m = rpd.modulus();
    let p = m.p();
    let n = pairs.len();
    let (ti, yi) = pairs[i];
    let mono = |exps: Vec<u32>, c: u64| {
        let mut z = rpd.zero();
        if let Some(k) = rpd.index_of(&exps) {
            let mut v = z.coeffs().to_vec();
            v[k] = m.reduce(c);
            z = rpd.from_coeffs(v).unwrap();
        }
        z
    };
    let mut out = rpd.zero();
    let lead = BigUint::from(p).pow((p - 2) as u32) * factorial_big(p);
    let mut e = vec![0u32; 2 * n];
    e[yi] = p as u32;
    out = out.add(&mono(e, m.reduce_big(&lead)));
    for j in 1..p {
        let c = binomial_big(p, j) / BigUint::from(p) * BigUint::from(p).pow((j - 1) as u32) * factorial_big(j);
        let mut e = vec![0u32; 2 * n];
        e[yi] = j as u32;
        e[ti] = (p - j) as u32;
        out = out.add(&mono(e, m.reduce_big(&c)));
    }
    // Taylor part of f_i(T + ξ) - f_i(T), divided by p.
    let f = base.generator_delta(i);
    let balg = base.algebra();
    let bound = rpd.weight_cap().unwrap_or(1);
    for (u, c) in f.support() {
        let te = balg.exponents(u);
        let mut ms = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for v in &ms {
                for k in 0..bound {
                    let mut w: Vec<u32> = v.clone();
                    w.push(k);
                    if w.iter().sum::<u32>() < bound {
                        next.push(w);
                    }
                }
            }
            ms = next;
        }
        for mm in ms {
            let total: u32 = mm.iter().sum();
            if total == 0 || mm.iter().zip(te).any(|(&a, &b)| a > b) {
                continue;
            }
            let mut coef = BigUint::from(c) * BigUint::from(p).pow(total - 1);
            let mut e = vec![0u32; 2 * n];
            for k in 0..n {
                coef *= binomial_big(te[k] as u64, mm[k] as u64) * factorial_big(mm[k] as u64);
                e[pairs[k].0] = te[k] - mm[k];
                e[pairs[k].1] = mm[k];
            }
            out = out.add(&mono(e, m.reduce_big(&coef)));
        }
    }
    out
}

/// The Frobenius lift on the truncated crystalline PD model `R{ξ/p}`
/// extending the one on `R`: `φ(T) = T^p + p f(T)` and
/// `φ((ξ/p)^[n]) = p^n (φ(ξ/p)/p)^[n]`.
pub fn crystalline_pd_frobenius(
    rpd: &Arc<TruncatedAlgebra>,
    base: &DeltaStructure,
    mode: PrismMode,
) -> Result<DeltaStructure> {
    if mode != PrismMode::Crystalline {
        return Err(Error::Invalid("the PD Frobenius model needs the crystalline prism".into()));
    }
    let balg = base.algebra();
    let pairs = pd_pairs(rpd, balg)?;
    let m = rpd.modulus();
    let p = m.p();
    let n = pairs.len();
    // Embed the base δ-images.
    let embed = |x: &AlgebraElement| {
        let mut z = rpd.zero();
        for (u, c) in x.support() {
            let mut e = balg.exponents(u).to_vec();
            e.extend(std::iter::repeat_n(0, n));
            z = z.add(&rpd.monomial(&e, c as i64));
        }
        z
    };
    let ys: Vec<AlgebraElement> = (0..n).map(|i| frobenius_over_p(rpd, base, &pairs, i)).collect();
    let mut images = Vec::new();
    let mut powers = Vec::new();
    for i in 0..n {
        let t = rpd.generator(pairs[i].0);
        let f = embed(base.generator_delta(i));
        images.push(t.pow(p).add(&f.scale(p)));
        let g = &rpd.generators()[pairs[i].0];
        powers.push(checked_power_deltas(&t, &f, &g.name, g.cap)?);
    }
    for i in 0..n {
        let (_, yi) = pairs[i];
        images.push(ys[i].scale(p));
        // δ(y^[k]) = p^{k-1} Y^[k] - ((pk)!/(p (k!)^p)) y^[pk], exactly.
        let cap = rpd.generators()[yi].cap;
        let ypow = pd_divided_powers(&ys[i], cap)?;
        let mut row = vec![rpd.zero()];
        for k in 1..cap {
            let a = ypow[k as usize].scale(m.p_pow(k - 1));
            let c = factorial_big(p * k as u64)
                / (factorial_big(k as u64).pow(p as u32) * BigUint::from(p));
            let mut e = vec![0u32; 2 * n];
            e[yi] = (p as u32) * k;
            let b = rpd.monomial(&e, 1).scale(m.reduce_big(&c));
            row.push(a.sub(&b));
        }
        powers.push(row);
    }
    let phi = RingMap::from_generator_images(rpd, rpd, images)?;
    Ok(DeltaStructure {
        alg: rpd.clone(),
        powers,
        phi,
    })
}

/// Whether φ of every basis monomial of positive PD weight is divisible by
/// `p`; returns the first offending monomial otherwise.
pub fn frobenius_lands_in_p(d: &DeltaStructure) -> Option<String> {
    let alg = d.algebra();
    (0..alg.dim())
        .filter(|&i| alg.pd_weight(i) > 0)
        .find(|&i| !d.frobenius(&alg.basis_element(i)).divisible_by_p_pow(1))
        .map(|i| alg.monomial_name(i))
}

/// Checks the three γ_p properties modulo `p` on random PD-ideal elements:
/// `p! γ_p(x) ≡ x^p`, `γ_p(ax) ≡ a^p γ_p(x)`, and the addition formula.
pub fn check_gamma_properties<R: Rng>(d: &DeltaStructure, trials: usize, rng: &mut R) -> AxiomReport {
    let alg = d.algebra();
    let m = alg.modulus();
    let p = m.p();
    let fact = m.reduce_big(&factorial_big(p));
    for _ in 0..trials {
        let x = random_ideal_element(alg, rng);
        let y = random_ideal_element(alg, rng);
        let a = random_element(alg, rng);
        let (Ok(gx), Ok(gy)) = (d.gamma_p(&x), d.gamma_p(&y)) else {
            return fail(trials, "γ_p", &x, &y);
        };
        if !gx.scale(fact).eq_mod_p_pow(&x.pow(p), 1) {
            return fail(trials, "p!γ_p(x) ≡ x^p", &x, &y);
        }
        let gax = d.gamma_p(&a.mul(&x)).expect("unit factorial");
        if !gax.eq_mod_p_pow(&a.pow(p).mul(&gx), 1) {
            return fail(trials, "γ_p(ax) ≡ a^pγ_p(x)", &a, &x);
        }
        let mut rhs = gx.add(&gy);
        for i in 1..p {
            let den = m.reduce_big(&(factorial_big(i) * factorial_big(p - i)));
            let inv = m.inverse(den).expect("unit");
            rhs = rhs.add(&x.pow(i).mul(&y.pow(p - i)).scale(inv));
        }
        let gxy = d.gamma_p(&x.add(&y)).expect("unit factorial");
        if !gxy.eq_mod_p_pow(&rhs, 1) {
            return fail(trials, "γ_p(x+y) addition formula", &x, &y);
        }
    }
    AxiomReport {
        trials,
        counterexample: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_pd_extension, make_poly_algebra, pd_divided_power, GeneratorSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn md(p: u64, n: u32) -> Modulus {
        Modulus::new(p, n).unwrap()
    }

    #[test]
    fn delta_examples() {
        let a = make_poly_algebra(md(5, 2), &[GeneratorSpec::polynomial("T", 3)]).unwrap();
        let d = DeltaStructure::trivial(&a).unwrap();
        assert!(d.delta(&a.zero()).is_zero());
        // (2 - 32)/5 = -6.
        assert_eq!(d.delta(&a.constant(2)), a.constant(-6));
        assert!(d.delta(&a.generator(0)).is_zero());
    }

    #[test]
    fn frobenius_examples() {
        let a = make_poly_algebra(md(5, 2), &[GeneratorSpec::polynomial("T", 3)]).unwrap();
        let d = DeltaStructure::trivial(&a).unwrap();
        assert_eq!(d.frobenius(&a.one()), a.one());
        assert!(d.frobenius(&a.generator(0)).is_zero());
        let t1 = a.generator(0).add(&a.one());
        // φ is additive, so φ(T+1) = T^5 + 1 = 1; the binomial expansion
        // (T+1)^5 = 1 + 5T + 10T^2 agrees with it only modulo 5.
        let binomial = a.one().add(&a.generator(0).scale(5)).add(&a.generator(0).pow(2).scale(10));
        assert_eq!(t1.pow(5), binomial);
        assert_eq!(d.frobenius(&t1), a.one());
        assert!(d.frobenius(&t1).eq_mod_p_pow(&binomial, 1));
    }

    #[test]
    fn axioms_hold_on_small_rings() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = make_poly_algebra(md(5, 2), &[GeneratorSpec::polynomial("T", 3)]).unwrap();
        let t = a.generator(0);
        let d = DeltaStructure::new(&a, vec![t.pow(2)]).unwrap();
        let r = check_delta_axioms(&d, 20, &mut rng);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn ill_defined_frobenius_rejected() {
        let a = make_poly_algebra(md(5, 3), &[GeneratorSpec::polynomial("T", 2)]).unwrap();
        // φ(T) = T^5 + 5 = 5, and 5^2 ≠ 0 mod 125.
        assert!(DeltaStructure::new(&a, vec![a.one()]).is_err());
    }

    #[test]
    fn delta_xi_examples() {
        let a = make_poly_algebra(
            md(2, 2),
            &[GeneratorSpec::polynomial("T", 3), GeneratorSpec::polynomial("xi", 3)],
        )
        .unwrap();
        let (t, x) = (a.generator(0), a.generator(1));
        let d0 = delta_xi(&a, 0, &[0], &[1], &[a.zero()]).unwrap();
        assert_eq!(d0, x.mul(&t));
        let d1 = delta_xi(&a, 0, &[0], &[1], &[t.clone()]).unwrap();
        assert_eq!(d1, x.mul(&t).add(&x));
        // ξ = 0 slot: evaluate at ξ ↦ 0.
        let kill = RingMap::from_generator_images(&a, &a, vec![t.clone(), a.zero()]).unwrap();
        assert!(kill.apply(&d1).is_zero());
    }

    #[test]
    fn crystalline_model_p2() {
        let r = make_poly_algebra(md(2, 3), &[GeneratorSpec::polynomial("T", 3)]).unwrap();
        let base = DeltaStructure::trivial(&r).unwrap();
        let rpd = make_pd_extension(&r, 1, 4).unwrap();
        let d = crystalline_pd_frobenius(&rpd, &base, PrismMode::Crystalline).unwrap();
        let y = rpd.generator(1);
        let t = rpd.generator(0);
        // φ(ξ/2) = 2 (ξ/2)^2 + ξT with ξ = 2y: 2·2·y^[2] + 2·yT.
        let expect = rpd.monomial(&[0, 2], 4).add(&y.mul(&t).scale(2));
        assert_eq!(d.frobenius(&y), expect);
        assert_eq!(d.frobenius(&pd_divided_power(&y, 1).unwrap()), d.frobenius(&y));
        assert_eq!(d.frobenius(&t), t.pow(2));
        assert!(frobenius_lands_in_p(&d).is_none());
        assert!(crystalline_pd_frobenius(&rpd, &base, PrismMode::QDeRham { k: 1 }).is_err());
    }

    #[test]
    fn gamma_examples() {
        let r = make_poly_algebra(md(3, 2), &[GeneratorSpec::polynomial("T", 2)]).unwrap();
        let base = DeltaStructure::trivial(&r).unwrap();
        let rpd = make_pd_extension(&r, 1, 5).unwrap();
        let d = crystalline_pd_frobenius(&rpd, &base, PrismMode::Crystalline).unwrap();
        assert!(d.gamma_p(&rpd.zero()).unwrap().is_zero());
        // T^{p-1} = 0 and f = 0: γ_p(ξ/p) ≡ (ξ/p)^[p] mod p.
        let y = rpd.generator(1);
        let g = d.gamma_p(&y).unwrap();
        assert!(g.eq_mod_p_pow(&pd_divided_power(&y, 3).unwrap(), 1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(check_gamma_properties(&d, 10, &mut rng).passed());
    }
}
