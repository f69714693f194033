use super::{Modulus, Scalar};
use crate::{Error, Result};
use std::fmt;

/// Dense row-major matrix over `Z/p^N`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ScalarMatrix {
    rows: usize,
    cols: usize,
    modulus: Modulus,
    data: Vec<u64>,
}

impl ScalarMatrix {
    pub fn zeros(rows: usize, cols: usize, modulus: Modulus) -> Self {
        ScalarMatrix {
            rows,
            cols,
            modulus,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, modulus: Modulus) -> Self {
        let mut a = Self::zeros(n, n, modulus);
        for i in 0..n {
            a.data[i * n + i] = 1 % modulus.modulus();
        }
        a
    }

    /// Builds from raw residues; values are reduced.
    pub fn from_raw(rows: usize, cols: usize, modulus: Modulus, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let data = data.into_iter().map(|x| modulus.reduce(x)).collect();
        Ok(ScalarMatrix {
            rows,
            cols,
            modulus,
            data,
        })
    }

    pub fn from_rows(modulus: Modulus, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&x| modulus.reduce_i64(x))
            .collect();
        Ok(ScalarMatrix {
            rows: r,
            cols: c,
            modulus,
            data,
        })
    }

    pub fn from_scalars(rows: usize, cols: usize, entries: &[Scalar]) -> Result<Self> {
        let modulus = entries
            .first()
            .map(|s| s.modulus())
            .ok_or_else(|| Error::Shape("no entries to infer the modulus from".into()))?;
        if entries.iter().any(|s| s.modulus() != modulus) {
            return Err(Error::ModulusMismatch(
                modulus.to_string(),
                "mixed entries".into(),
            ));
        }
        Self::from_raw(rows, cols, modulus, entries.iter().map(|s| s.value()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn scalar(&self, i: usize, j: usize) -> Scalar {
        Scalar::new(self.get(i, j) as i64, self.modulus)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = self.modulus.reduce(v);
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: u64) {
        let k = i * self.cols + j;
        self.data[k] = self.modulus.add(self.data[k], self.modulus.reduce(v));
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.modulus);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn scale(&self, c: u64) -> Self {
        let m = self.modulus;
        let c = m.reduce(c);
        ScalarMatrix {
            data: self.data.iter().map(|&x| m.mul(x, c)).collect(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus;
        ScalarMatrix {
            data: self.data.iter().map(|&x| m.neg(x)).collect(),
            ..self.clone()
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.to_string(),
                other.modulus.to_string(),
            ));
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let m = self.modulus;
        Ok(ScalarMatrix {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| m.add(a, b))
                .collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Matrix product, skipping zero entries of the left factor.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.to_string(),
                other.modulus.to_string(),
            ));
        }
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let m = self.modulus;
        let (k, c) = (self.cols, other.cols);
        let mut out = Self::zeros(self.rows, c, m);
        crate::par::for_each_chunk(&mut out.data, c.max(1), |i, row| {
            if c == 0 {
                return;
            }
            for t in 0..k {
                let a = self.data[i * k + t];
                if a == 0 {
                    continue;
                }
                let orow = &other.data[t * c..(t + 1) * c];
                for (o, &b) in row.iter_mut().zip(orow) {
                    if b != 0 {
                        *o = m.mul_add(*o, a, b);
                    }
                }
            }
        });
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        let m = self.modulus;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| m.mul_add(acc, a, b))
            })
            .collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.modulus != other.modulus {
            return Err(Error::Shape("hcat row mismatch".into()));
        }
        let cols = self.cols + other.cols;
        let mut out = Self::zeros(self.rows, cols, self.modulus);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    /// Keeps the listed columns in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len(), self.modulus);
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.data[i * cols.len() + jj] = self.get(i, j);
            }
        }
        out
    }

    /// Block-diagonal sum.
    pub fn direct_sum(blocks: &[ScalarMatrix], modulus: Modulus) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols, modulus);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.data[(r0 + i) * cols + c0 + j] = b.get(i, j);
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Self) -> Self {
        let m = self.modulus;
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols, m);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * cols + j * other.cols + l] =
                            m.mul(a, other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Rewrites every entry into another modulus of the same prime by
    /// reducing the canonical lift.
    pub fn reduce_to(&self, target: Modulus) -> Self {
        ScalarMatrix {
            rows: self.rows,
            cols: self.cols,
            modulus: target,
            data: self.data.iter().map(|&x| target.reduce(x)).collect(),
        }
    }
}

impl fmt::Debug for ScalarMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {}", self.rows, self.cols, self.modulus)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}
