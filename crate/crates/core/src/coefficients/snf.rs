use super::ScalarMatrix;
use crate::{Error, Result};
use std::fmt;

/// Cyclic decomposition `⊕ Z/p^e` of a finite `Z/p^N`-module.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementaryDivisors {
    p: u64,
    exponents: Vec<u32>,
}

impl ElementaryDivisors {
    /// Drops zero exponents and sorts descending.
    pub fn new(p: u64, mut exponents: Vec<u32>) -> Self {
        exponents.retain(|&e| e > 0);
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        ElementaryDivisors { p, exponents }
    }

    pub fn zero(p: u64) -> Self {
        ElementaryDivisors {
            p,
            exponents: Vec::new(),
        }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Composition length over `Z/p^N`, i.e. `log_p` of the order.
    pub fn length(&self) -> u64 {
        self.exponents.iter().map(|&e| e as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.exponents.is_empty()
    }
}

impl fmt::Display for ElementaryDivisors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .exponents
            .iter()
            .map(|e| format!("(Z/{}^{})", self.p, e))
            .collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// Result of [`smith_normal_form`]: `u * a * v == d`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: ScalarMatrix,
    pub d: ScalarMatrix,
    pub v: ScalarMatrix,
    /// Pivot exponents in diagonal order (nondecreasing).
    pub pivots: Vec<u32>,
}

impl Smith {
    pub fn divisors(&self) -> ElementaryDivisors {
        let n = self.d.modulus().precision();
        // Cokernel of the map: missing pivots contribute full cyclic factors.
        let mut e: Vec<u32> = self.pivots.iter().copied().collect();
        e.extend(std::iter::repeat_n(n, self.d.rows() - self.pivots.len()));
        ElementaryDivisors::new(self.d.modulus().p(), e)
    }
}

/// Rows per parallel task before row elimination fans out.
const PAR_THRESHOLD: usize = 1 << 14;

struct Tracks<'a> {
    u: Option<&'a mut ScalarMatrix>,
    v: Option<&'a mut ScalarMatrix>,
    /// Receives the inverse column operations as row operations, so that it
    /// ends up multiplied on the left by `v^{-1}`.
    vinv: Option<&'a mut ScalarMatrix>,
}

fn swap_rows(a: &mut ScalarMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    let c = a.cols();
    let data = a.data_mut();
    for t in 0..c {
        data.swap(i * c + t, j * c + t);
    }
}

fn swap_cols(a: &mut ScalarMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    let (r, c) = (a.rows(), a.cols());
    let data = a.data_mut();
    for t in 0..r {
        data.swap(t * c + i, t * c + j);
    }
}

/// `row_dst += c * row_src`, from column `from` on.
fn row_axpy(a: &mut ScalarMatrix, dst: usize, src: usize, c: u64, from: usize) {
    if c == 0 {
        return;
    }
    let m = a.modulus();
    let cols = a.cols();
    let data = a.data_mut();
    for t in from..cols {
        let s = data[src * cols + t];
        if s != 0 {
            data[dst * cols + t] = m.mul_add(data[dst * cols + t], c, s);
        }
    }
}

fn scale_row(a: &mut ScalarMatrix, i: usize, c: u64) {
    let m = a.modulus();
    let cols = a.cols();
    for x in &mut a.data_mut()[i * cols..(i + 1) * cols] {
        *x = m.mul(*x, c);
    }
}

/// Clears column `k` below the pivot row `k` in `a` (and mirrors on `u`).
fn eliminate_below(a: &mut ScalarMatrix, u: Option<&mut ScalarMatrix>, k: usize, e: u32) {
    let m = a.modulus();
    let (rows, cols) = (a.rows(), a.cols());
    let pe = m.p().pow(e);
    let factors: Vec<u64> = (k + 1..rows)
        .map(|i| m.neg(a.get(i, k) / pe))
        .collect();
    if factors.iter().all(|&c| c == 0) {
        return;
    }
    let pivot_row: Vec<u64> = a.row(k).to_vec();
    let width = cols - k;
    let tail = &mut a.data_mut()[(k + 1) * cols..];
    let work = |idx: usize, row: &mut [u64]| {
        let c = factors[idx];
        if c == 0 {
            return;
        }
        for (x, &s) in row[k..].iter_mut().zip(&pivot_row[k..]) {
            if s != 0 {
                *x = m.mul_add(*x, c, s);
            }
        }
    };
    if (rows - k) * width >= PAR_THRESHOLD {
        crate::par::for_each_chunk(tail, cols, work);
    } else {
        tail.chunks_mut(cols).enumerate().for_each(|(i, r)| work(i, r));
    }
    if let Some(u) = u {
        let urow: Vec<u64> = u.row(k).to_vec();
        let uc = u.cols();
        let utail = &mut u.data_mut()[(k + 1) * uc..];
        for (i, row) in utail.chunks_mut(uc).enumerate() {
            let c = factors[i];
            if c == 0 {
                continue;
            }
            for (x, &s) in row.iter_mut().zip(&urow) {
                if s != 0 {
                    *x = m.mul_add(*x, c, s);
                }
            }
        }
    }
}

/// Diagonalizes `a` in place and returns the pivot exponents.
///
/// Pivot rule: the first entry (row-major) of minimal valuation in the
/// remaining block, scaled to an exact power of `p`.
fn diagonalize(a: &mut ScalarMatrix, mut t: Tracks<'_>) -> Vec<u32> {
    let m = a.modulus();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    for k in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        'scan: for i in k..rows {
            for j in k..cols {
                let x = a.get(i, j);
                if x == 0 {
                    continue;
                }
                let e = m.valuation(x).unwrap_or(0);
                if best.is_none_or(|(b, _, _)| e < b) {
                    best = Some((e, i, j));
                    if e == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((e, pi, pj)) = best else { break };
        swap_rows(a, k, pi);
        if let Some(u) = t.u.as_deref_mut() {
            swap_rows(u, k, pi);
        }
        swap_cols(a, k, pj);
        if let Some(v) = t.v.as_deref_mut() {
            swap_cols(v, k, pj);
        }
        if let Some(x) = t.vinv.as_deref_mut() {
            swap_rows(x, k, pj);
        }
        let (_, unit) = m.split(a.get(k, k)).expect("pivot is nonzero");
        let inv = m.inverse(unit).expect("unit part is invertible");
        scale_row(a, k, inv);
        if let Some(u) = t.u.as_deref_mut() {
            scale_row(u, k, inv);
        }
        eliminate_below(a, t.u.as_deref_mut(), k, e);
        let pe = m.p().pow(e);
        for j in k + 1..cols {
            let x = a.get(k, j);
            if x == 0 {
                continue;
            }
            let c = x / pe;
            a.set(k, j, 0);
            if let Some(v) = t.v.as_deref_mut() {
                // col_j -= c * col_k
                let nc = m.neg(c);
                for r in 0..v.rows() {
                    let s = v.get(r, k);
                    if s != 0 {
                        let val = m.mul_add(v.get(r, j), nc, s);
                        v.set(r, j, val);
                    }
                }
            }
            if let Some(x) = t.vinv.as_deref_mut() {
                row_axpy(x, k, j, c, 0);
            }
        }
        pivots.push(e);
    }
    pivots
}

/// Smith normal form over the chain ring `Z/p^N`.
pub fn smith_normal_form(a: &ScalarMatrix) -> Smith {
    let m = a.modulus();
    let mut d = a.clone();
    let mut u = ScalarMatrix::identity(a.rows(), m);
    let mut v = ScalarMatrix::identity(a.cols(), m);
    let pivots = diagonalize(
        &mut d,
        Tracks {
            u: Some(&mut u),
            v: Some(&mut v),
            vinv: None,
        },
    );
    Smith { u, d, v, pivots }
}

fn pivots_only(a: &ScalarMatrix) -> Vec<u32> {
    let mut d = a.clone();
    diagonalize(
        &mut d,
        Tracks {
            u: None,
            v: None,
            vinv: None,
        },
    )
}

/// Generators of the kernel of `a` as the columns of a matrix.
pub fn kernel_generators(a: &ScalarMatrix) -> ScalarMatrix {
    let m = a.modulus();
    let n = m.precision();
    let mut d = a.clone();
    let mut v = ScalarMatrix::identity(a.cols(), m);
    let pivots = diagonalize(
        &mut d,
        Tracks {
            u: None,
            v: Some(&mut v),
            vinv: None,
        },
    );
    let mut cols = Vec::new();
    let mut scales = Vec::new();
    for j in 0..a.cols() {
        let e = pivots.get(j).copied().unwrap_or(0);
        if j < pivots.len() && e == 0 {
            continue;
        }
        cols.push(j);
        scales.push(if j < pivots.len() { m.p_pow(n - e) } else { 1 });
    }
    let mut out = v.select_cols(&cols);
    for (k, &s) in scales.iter().enumerate() {
        if s != 1 {
            for r in 0..out.rows() {
                let x = m.mul(out.get(r, k), s);
                out.set(r, k, x);
            }
        }
    }
    out
}

/// Elementary divisors of the cokernel of `a`, without the transforms.
pub fn cokernel_divisors(a: &ScalarMatrix) -> ElementaryDivisors {
    let m = a.modulus();
    let mut e = pivots_only(a);
    e.extend(std::iter::repeat_n(m.precision(), a.rows() - e.len()));
    ElementaryDivisors::new(m.p(), e)
}

/// Length of the column span of `a`.
pub fn image_length(a: &ScalarMatrix) -> u64 {
    let n = a.modulus().precision();
    pivots_only(a).iter().map(|&e| (n - e) as u64).sum()
}

/// Whether every column of `b` lies in the column span of `a`.
pub fn image_contains(a: &ScalarMatrix, b: &ScalarMatrix) -> Result<bool> {
    if b.cols() == 0 {
        return Ok(true);
    }
    let joint = a.hcat(b)?;
    Ok(image_length(&joint) == image_length(a))
}

/// Homology `ker(d_out) / im(d_in)` at the middle term.
///
/// `d_in` maps into the middle term and `d_out` out of it; matrices act on
/// column vectors.
pub fn homology_at(d_in: &ScalarMatrix, d_out: &ScalarMatrix) -> Result<ElementaryDivisors> {
    let m = d_out.modulus();
    if d_in.modulus() != m {
        return Err(Error::ModulusMismatch(m.to_string(), d_in.modulus().to_string()));
    }
    let mid = d_out.cols();
    if d_in.rows() != mid {
        return Err(Error::Shape(format!(
            "d_in has {} rows but d_out has {} columns",
            d_in.rows(),
            mid
        )));
    }
    if !d_out.mul(d_in)?.is_zero() {
        return Err(Error::NotComplex);
    }
    homology_unchecked(d_in, d_out)
}

pub(crate) fn homology_unchecked(
    d_in: &ScalarMatrix,
    d_out: &ScalarMatrix,
) -> Result<ElementaryDivisors> {
    let m = d_out.modulus();
    let n = m.precision();
    let mid = d_out.cols();
    let mut a = d_out.clone();
    let mut x = d_in.clone();
    let pivots = diagonalize(
        &mut a,
        Tracks {
            u: None,
            v: None,
            vinv: Some(&mut x),
        },
    );
    // Kernel in the new coordinates: generator j has order p^{orders[j]}.
    let orders: Vec<u32> = (0..mid)
        .map(|j| pivots.get(j).copied().unwrap_or(n))
        .collect();
    let kept: Vec<usize> = (0..mid).filter(|&j| orders[j] > 0).collect();
    let k = kept.len();
    let c = x.cols();
    let mut pres = ScalarMatrix::zeros(k, c + k, m);
    for (row, &j) in kept.iter().enumerate() {
        let shift = n - orders[j];
        let pe = m.p().pow(shift);
        for col in 0..c {
            let val = x.get(j, col);
            if val % pe != 0 {
                return Err(Error::NotComplex);
            }
            pres.set(row, col, val / pe);
        }
        pres.set(row, c + row, m.p_pow(orders[j]));
    }
    let piv = pivots_only(&pres);
    let mut exps: Vec<u32> = piv;
    exps.extend(std::iter::repeat_n(n, k - exps.len()));
    Ok(ElementaryDivisors::new(m.p(), exps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Modulus;

    fn md(p: u64, n: u32) -> Modulus {
        Modulus::new(p, n).unwrap()
    }

    fn diag_values(s: &Smith) -> Vec<u64> {
        (0..s.d.rows().min(s.d.cols())).map(|i| s.d.get(i, i)).collect()
    }

    #[test]
    fn snf_examples() {
        let m = md(5, 2);
        let id = ScalarMatrix::identity(2, m);
        assert_eq!(smith_normal_form(&id).d, id);
        let a = ScalarMatrix::from_rows(m, &[vec![5, 0], vec![0, 1]]).unwrap();
        assert_eq!(diag_values(&smith_normal_form(&a)), vec![1, 5]);
        let b = ScalarMatrix::from_rows(m, &[vec![5, 10], vec![10, 20]]).unwrap();
        let s = smith_normal_form(&b);
        assert_eq!(diag_values(&s), vec![5, 0]);
        assert_eq!(s.u.mul(&b).unwrap().mul(&s.v).unwrap(), s.d);
    }

    #[test]
    fn homology_examples() {
        let m = md(5, 1);
        let z = ScalarMatrix::zeros(3, 3, m);
        assert_eq!(homology_at(&z, &z).unwrap().exponents(), &[1, 1, 1]);
        let id = ScalarMatrix::identity(3, m);
        assert!(homology_at(&z, &id).unwrap().is_zero());
        let m2 = md(5, 2);
        let five = ScalarMatrix::from_rows(m2, &[vec![5]]).unwrap();
        let zero = ScalarMatrix::zeros(1, 1, m2);
        assert_eq!(homology_at(&five, &zero).unwrap().exponents(), &[1]);
        assert_eq!(homology_at(&id, &id), Err(Error::NotComplex));
    }

    #[test]
    fn homology_mixed_orders() {
        // Z/25 --x5--> Z/25 --x5--> Z/25: ker = 5Z/25, im = 5Z/25.
        let m = md(5, 2);
        let five = ScalarMatrix::from_rows(m, &[vec![5]]).unwrap();
        assert!(homology_at(&five, &five).unwrap().is_zero());
        // (Z/8)^2 with d_out = [2 0] and d_in = (0, 4)^T: ker = 4Z/8 ⊕ Z/8.
        let m = md(2, 3);
        let d_out = ScalarMatrix::from_rows(m, &[vec![2, 0]]).unwrap();
        let d_in = ScalarMatrix::from_rows(m, &[vec![0], vec![4]]).unwrap();
        assert_eq!(homology_at(&d_in, &d_out).unwrap().exponents(), &[2, 1]);
    }

    #[test]
    fn kernel_generators_span_kernel() {
        let m = md(3, 2);
        let a = ScalarMatrix::from_rows(m, &[vec![3, 6, 0], vec![0, 3, 1]]).unwrap();
        let k = kernel_generators(&a);
        assert!(a.mul(&k).unwrap().is_zero());
        // |ker| = 9^3 / |im|.
        assert_eq!(image_length(&k), 6 - image_length(&a));
    }

    #[test]
    fn image_checks() {
        let m = md(3, 2);
        let a = ScalarMatrix::from_rows(m, &[vec![3, 0], vec![0, 1]]).unwrap();
        assert_eq!(image_length(&a), 3);
        let b = ScalarMatrix::from_rows(m, &[vec![6], vec![2]]).unwrap();
        assert!(image_contains(&a, &b).unwrap());
        let c = ScalarMatrix::from_rows(m, &[vec![1], vec![0]]).unwrap();
        assert!(!image_contains(&a, &c).unwrap());
    }
}
