//! Square nonnegative integer matrices with arbitrary-precision entries.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Row-major square matrix over the nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    n: usize,
    entries: Vec<BigUint>,
}

impl IntegerMatrix {
    pub fn zero(n: usize) -> Self {
        IntegerMatrix { n, entries: vec![BigUint::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i, BigUint::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        let entries = rows.into_iter().flatten().map(BigUint::from).collect();
        IntegerMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigUint) {
        self.entries[i * self.n + j] = v;
    }

    pub fn add_assign_at(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.n + j] += v;
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = IntegerMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j) + a * b;
                        out.set(i, j, cur);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    /// Restriction to the rows and columns in `idx` (kept in the given order).
    pub fn restrict(&self, idx: &[usize]) -> IntegerMatrix {
        let mut out = IntegerMatrix::zero(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<BigUint> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn entry_sum(&self) -> BigUint {
        self.entries.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| u128::try_from(self.get(i, j)).map(|v| v as f64).unwrap_or(f64::MAX))
                    .collect()
            })
            .collect()
    }

    /// Adjacency lists of the digraph with an edge i -> j iff entry (i,j) > 0.
    pub fn support_digraph(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| (0..self.n).filter(|&j| !self.get(i, j).is_zero()).collect())
            .collect()
    }

    /// Characteristic polynomial det(xI - M), coefficients from x^n down to
    /// the constant term (monic), via the Faddeev-LeVerrier recursion; every
    /// division in the recursion is exact over the integers.
    pub fn char_poly(&self) -> Vec<BigInt> {
        let n = self.n;
        let a: Vec<BigInt> = self.entries.iter().map(|e| BigInt::from(e.clone())).collect();
        let get = |m: &[BigInt], i: usize, j: usize| m[i * n + j].clone();
        let mut coeffs = vec![BigInt::one()];
        // m = A * (previous m + c * I), c = -tr(m)/k
        let mut m: Vec<BigInt> = a.clone();
        for k in 1..=n {
            let tr: BigInt = (0..n).map(|i| get(&m, i, i)).sum();
            let c = -tr / BigInt::from(k);
            coeffs.push(c.clone());
            if k == n {
                break;
            }
            // next m = A * (m + c I)
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[i * n + i] += &c;
            }
            let mut next = vec![BigInt::zero(); n * n];
            for i in 0..n {
                for l in 0..n {
                    let v = &a[i * n + l];
                    if v.is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        let s = &shifted[l * n + j];
                        if !s.is_zero() {
                            next[i * n + j] += v * s;
                        }
                    }
                }
            }
            m = next;
        }
        coeffs
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// Renders a char-poly coefficient list like `x^3 - 2x^2 - 8x`.
pub fn poly_string(coeffs: &[BigInt]) -> String {
    let n = coeffs.len() - 1;
    let mut out = String::new();
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let deg = n - i;
        let mag = c.magnitude().to_string();
        let sign_neg = c.sign() == num_bigint::Sign::Minus;
        if out.is_empty() {
            if sign_neg {
                out.push('-');
            }
        } else {
            out.push_str(if sign_neg { " - " } else { " + " });
        }
        let show_coeff = mag != "1" || deg == 0;
        if show_coeff {
            out.push_str(&mag);
        }
        match deg {
            0 => {}
            1 => out.push('x'),
            _ => {
                out.push_str("x^");
                out.push_str(&deg.to_string());
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Serialization helpers: matrices and vectors as decimal strings so that
/// arbitrary-precision entries survive JSON round trips exactly.
impl Serialize for IntegerMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntegerMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        let n = rows.len();
        let mut m = IntegerMatrix::zero(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(D::Error::custom("matrix rows must form a square"));
            }
            for (j, e) in row.iter().enumerate() {
                m.set(i, j, e.parse().map_err(D::Error::custom)?);
            }
        }
        Ok(m)
    }
}
