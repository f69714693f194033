//! Parsing polynomial expressions such as `3*T1^2 - T2*x[2] + 1`.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{AlgebraElement, GeneratorKind, TruncatedAlgebra};

/// A parse failure at a 1-based character column of the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for PolyError {}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    alg: &'a Arc<TruncatedAlgebra>,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|c| c.0 + 1)
            .unwrap_or_else(|| self.chars.last().map(|c| c.0 + 2).unwrap_or(1))
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), PolyError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn integer(&mut self) -> Result<u64, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let s: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        s.parse().map_err(|_| PolyError {
            column: self.chars[start].0 + 1,
            message: format!("integer {s} is too large"),
        })
    }

    /// A signed sum of terms, ending at end of input or before `)` when
    /// `nested`.
    fn expr(&mut self, nested: bool) -> Result<AlgebraElement, PolyError> {
        let mut acc = self.alg.zero();
        let mut first = true;
        loop {
            let mut negate = false;
            match self.peek() {
                Some('+') => self.pos += 1,
                Some('-') => {
                    self.pos += 1;
                    negate = true;
                }
                Some(')') if nested && !first => break,
                None if !nested && !first => break,
                None if nested => return self.err("unclosed '('"),
                _ if first => {}
                Some(_) => return self.err("expected '+' or '-'"),
                None => break,
            }
            first = false;
            let t = self.term()?;
            acc = if negate { acc.sub(&t) } else { acc.add(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<AlgebraElement, PolyError> {
        let mut acc = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<AlgebraElement, PolyError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                Ok(self.alg.constant(self.alg.modulus().reduce(v) as i64))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let col = self.column();
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].1.is_ascii_alphanumeric() || self.chars[self.pos].1 == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                let g = match self.alg.generator_index(&name) {
                    Some(g) => g,
                    None => {
                        return Err(PolyError {
                            column: col,
                            message: format!("unknown generator '{name}'"),
                        })
                    }
                };
                let spec = &self.alg.generators()[g];
                match self.peek() {
                    Some('[') => {
                        self.pos += 1;
                        let k = self.integer()?;
                        self.expect(']')?;
                        if spec.kind != GeneratorKind::DividedPower {
                            return Err(PolyError {
                                column: col,
                                message: format!("'{name}' is not a divided-power generator"),
                            });
                        }
                        let mut e = vec![0; self.alg.ngens()];
                        e[g] = k.min(u32::MAX as u64) as u32;
                        Ok(self.alg.monomial(&e, 1))
                    }
                    Some('^') => {
                        self.pos += 1;
                        let k = self.integer()?;
                        Ok(self.alg.generator(g).pow(k))
                    }
                    _ => Ok(self.alg.generator(g)),
                }
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr(true)?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parses a polynomial in the generators of `alg`. Whitespace is ignored and
/// the empty string is zero.
pub fn parse_element(alg: &Arc<TruncatedAlgebra>, text: &str) -> Result<AlgebraElement, PolyError> {
    let mut cur = Cursor {
        chars: text.chars().enumerate().collect(),
        pos: 0,
        alg,
    };
    if cur.peek().is_none() {
        return Ok(alg.zero());
    }
    cur.expr(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GeneratorSpec;
    use crate::coefficients::Modulus;

    fn alg() -> Arc<TruncatedAlgebra> {
        TruncatedAlgebra::new(
            Modulus::new(3, 2).unwrap(),
            vec![GeneratorSpec::polynomial("T", 4), GeneratorSpec::divided_power("x", 4)],
            None,
        )
        .unwrap()
    }

    #[test]
    fn parses_sums_products_and_pd_powers() {
        let a = alg();
        let e = parse_element(&a, " 2*T^2 - T * x[2] + 10 ").unwrap();
        let t = a.generator(0);
        let x2 = a.monomial(&[0, 2], 1);
        let want = t.pow(2).scale(2).sub(&t.mul(&x2)).add(&a.constant(10));
        assert_eq!(e, want);
        assert_eq!(parse_element(&a, "-(T+1)*(T-1)").unwrap(), a.one().sub(&t.pow(2)));
        assert!(parse_element(&a, "").unwrap().is_zero());
    }

    #[test]
    fn reports_columns() {
        let a = alg();
        assert_eq!(parse_element(&a, "T + y").unwrap_err().column, 5);
        assert_eq!(parse_element(&a, "T[2]").unwrap_err().column, 1);
        assert_eq!(parse_element(&a, "2*").unwrap_err().column, 3);
        assert_eq!(parse_element(&a, "T T").unwrap_err().column, 3);
    }
}
