//! Arithmetic in `Z/p^N` and linear algebra over that chain ring.

mod matrix;
mod snf;

pub use matrix::ScalarMatrix;
pub(crate) use snf::homology_unchecked;
pub use snf::{
    cokernel_divisors, homology_at, image_contains, image_length, kernel_generators, smith_normal_form,
    ElementaryDivisors, Smith,
};

use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;

/// Largest supported `p^N`; keeps every product inside `u128` and every sum
/// inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 62;

/// The ring `Z/p^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: u64,
    n: u32,
    m: u64,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Modulus {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::Invalid("precision must be at least 1".into()));
        }
        let mut m: u64 = 1;
        for _ in 0..n {
            m = m
                .checked_mul(p)
                .filter(|&m| m <= MAX_MODULUS)
                .ok_or_else(|| Error::Invalid(format!("{p}^{n} is too large")))?;
        }
        Ok(Modulus { p, n, m })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The precision exponent `N`.
    pub fn precision(&self) -> u32 {
        self.n
    }

    /// `p^N`.
    pub fn modulus(&self) -> u64 {
        self.m
    }

    /// The same prime at a different precision.
    pub fn with_precision(&self, n: u32) -> Result<Self> {
        Modulus::new(self.p, n)
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.m
    }

    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.m as i64) as u64
    }

    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.m as i128) as u64
    }

    pub fn reduce_big(&self, x: &BigUint) -> u64 {
        (x % BigUint::from(self.m)).to_u64().unwrap_or(0)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.m <= 1 << 32 {
            (a * b) % self.m
        } else {
            ((a as u128 * b as u128) % self.m as u128) as u64
        }
    }

    /// `a + b*c`.
    #[inline]
    pub fn mul_add(&self, a: u64, b: u64, c: u64) -> u64 {
        self.add(a, self.mul(b, c))
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.m;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// `p^e` reduced; zero once `e ≥ N`.
    pub fn p_pow(&self, e: u32) -> u64 {
        if e >= self.n {
            0
        } else {
            self.p.pow(e)
        }
    }

    /// Largest `e ≤ N` with `p^e | a`, or `None` for zero.
    pub fn valuation(&self, a: u64) -> Option<u32> {
        let mut a = a % self.m;
        if a == 0 {
            return None;
        }
        let mut e = 0;
        while a % self.p == 0 {
            a /= self.p;
            e += 1;
        }
        Some(e)
    }

    /// Splits a nonzero residue as `p^e * u` with `u` a unit.
    pub fn split(&self, a: u64) -> Option<(u32, u64)> {
        let e = self.valuation(a)?;
        Some((e, a / self.p.pow(e)))
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    pub fn inverse(&self, a: u64) -> Result<u64> {
        let a = a % self.m;
        if !self.is_unit(a) {
            return Err(Error::NotUnit {
                value: a,
                modulus: self.m,
            });
        }
        // Extended Euclid on (a, m).
        let (mut r0, mut r1) = (self.m as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(self.reduce_i128(t0))
    }

    /// Divides by a power of `p` that is known to divide the canonical lift.
    pub fn div_p_pow(&self, a: u64, e: u32) -> u64 {
        debug_assert!(e == 0 || a % self.p.pow(e) == 0);
        a / self.p.pow(e)
    }

    pub fn scalar(&self, value: i64) -> Scalar {
        Scalar {
            value: self.reduce_i64(value),
            modulus: *self,
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.n)
    }
}

/// A residue in `Z/p^N` carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    value: u64,
    modulus: Modulus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl Scalar {
    pub fn new(value: i64, modulus: Modulus) -> Self {
        modulus.scalar(value)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    fn check(&self, other: &Scalar) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.to_string(),
                other.modulus.to_string(),
            ));
        }
        Ok(())
    }

    pub fn arith(&self, other: &Scalar, op: ArithOp) -> Result<Scalar> {
        self.check(other)?;
        let m = &self.modulus;
        let value = match op {
            ArithOp::Add => m.add(self.value, other.value),
            ArithOp::Sub => m.sub(self.value, other.value),
            ArithOp::Mul => m.mul(self.value, other.value),
        };
        Ok(Scalar {
            value,
            modulus: *m,
        })
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.arith(other, ArithOp::Add)
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.arith(other, ArithOp::Sub)
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.arith(other, ArithOp::Mul)
    }

    /// `None` stands for the valuation of zero.
    pub fn p_valuation(&self) -> Option<u32> {
        self.modulus.valuation(self.value)
    }

    pub fn invert(&self) -> Result<Scalar> {
        Ok(Scalar {
            value: self.modulus.inverse(self.value)?,
            modulus: self.modulus,
        })
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

pub fn binomial_big(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut r = BigUint::one();
    for i in 0..b {
        r *= a - i;
        r /= i + 1;
    }
    r
}

pub fn factorial_big(m: u64) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, k| acc * k)
}

/// Exact `C(a, b)` reduced into `target`.
pub fn binomial(a: u64, b: u64, target: Modulus) -> Scalar {
    Scalar {
        value: target.reduce_big(&binomial_big(a, b)),
        modulus: target,
    }
}

/// `m! = p^v * u` with `u` prime to `p`; returns `(v, u)` with `u` exact.
pub fn factorial_split(m: u64, p: u64) -> (u64, BigUint) {
    let mut v = 0;
    let mut q = p;
    while q <= m {
        v += m / q;
        q = match q.checked_mul(p) {
            Some(q) => q,
            None => break,
        };
    }
    let mut f = factorial_big(m);
    let pb = BigUint::from(p);
    for _ in 0..v {
        f /= &pb;
    }
    (v, f)
}
