//! Exact points of the unit interval with denominator `q * 2^k`.
//!
//! Every point that appears in an orbit or a cell boundary of a rotated
//! odometer has this shape, so all interval arithmetic stays exact: no
//! floating point is used anywhere in the dynamical core.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// `num / (q * 2^log2_den)` with `0 <= value < 1`.
///
/// The power of two in the denominator is kept minimal (num odd or
/// log2_den = 0); the factor `q` is never cancelled so that the printed
/// form always exposes the ambient interval count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dyadic {
    num: BigUint,
    log2_den: u32,
    q: u64,
}

impl Dyadic {
    pub fn new(num: BigUint, log2_den: u32, q: u64) -> Result<Self, CoreError> {
        if q == 0 {
            return Err(CoreError::Precondition("q must be positive".into()));
        }
        // Orbit points live in [0,1); the value 1 itself is allowed so that
        // interval upper endpoints can be represented.
        let bound = BigUint::from(q) << log2_den;
        if num > bound {
            return Err(CoreError::Precondition(format!(
                "dyadic {num}/({q}*2^{log2_den}) lies outside [0,1]"
            )));
        }
        let mut d = Dyadic { num, log2_den, q };
        d.canonicalize();
        Ok(d)
    }

    pub fn zero(q: u64) -> Self {
        Dyadic { num: BigUint::zero(), log2_den: 0, q }
    }

    fn canonicalize(&mut self) {
        while self.log2_den > 0 && !self.num.is_zero() && !self.num.bit(0) {
            self.num >>= 1;
            self.log2_den -= 1;
        }
        if self.num.is_zero() {
            self.log2_den = 0;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn log2_den(&self) -> u32 {
        self.log2_den
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Index i with x in [i/q, (i+1)/q): the big interval containing x.
    pub fn big_interval(&self) -> usize {
        let i: BigUint = &self.num >> self.log2_den;
        usize::try_from(&i).expect("big interval index fits usize")
    }

    /// Rescale to resolution at least `k` (numerator multiplied accordingly).
    fn lifted_num(&self, k: u32) -> BigUint {
        debug_assert!(k >= self.log2_den);
        &self.num << (k - self.log2_den)
    }

    /// Branch index n >= 1 with x in [1 - 2^(1-n), 1 - 2^(-n)).
    pub fn carry_branch(&self) -> u32 {
        // In terms of y = 1 - x: find n with 2^(-n) < y <= 2^(1-n).
        let scale = BigUint::from(self.q) << self.log2_den;
        let y = &scale - &self.num; // y_num / scale, y_num >= 1
        let mut n = 1u32;
        // y <= 2^(-n)  <=>  y_num * 2^n <= scale
        while (&y << n) <= scale {
            n += 1;
        }
        n
    }

    /// One step of the dyadic add-with-carry map:
    /// x |-> x - 1 + 3 * 2^(-n) on the branch [1 - 2^(1-n), 1 - 2^(-n)).
    pub fn carry_step(&self) -> Dyadic {
        let n = self.carry_branch();
        let k = self.log2_den.max(n);
        let q = BigInt::from(self.q);
        let num = BigInt::from(self.lifted_num(k)) - (&q << k) + BigInt::from(3u8) * (&q << (k - n));
        let (sign, mag) = num.into_parts();
        debug_assert_ne!(sign, Sign::Minus, "carry step left [0,1)");
        let mut d = Dyadic { num: mag, log2_den: k, q: self.q };
        d.canonicalize();
        debug_assert!(d.num < (BigUint::from(d.q) << d.log2_den));
        d
    }

    /// Shift by `delta` big intervals (delta in units of 1/q, may be negative).
    pub fn shift_big_intervals(&self, delta: i64) -> Dyadic {
        let step = BigInt::from(delta) << self.log2_den;
        let num = BigInt::from(self.num.clone()) + step;
        let (sign, mag) = num.into_parts();
        debug_assert_ne!(sign, Sign::Minus, "interval shift left [0,1)");
        let mut d = Dyadic { num: mag, log2_den: self.log2_den, q: self.q };
        d.canonicalize();
        d
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        // num1/(q1 2^k1) vs num2/(q2 2^k2), cross-multiplied.
        let k = self.log2_den.max(other.log2_den);
        let lhs = self.lifted_num(k) * BigUint::from(other.q);
        let rhs = other.lifted_num(k) * BigUint::from(self.q);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/({}*2^{})", self.num, self.q, self.log2_den)
    }
}

impl FromStr for Dyadic {
    type Err = CoreError;

    /// Parses the exact text form `num/(q*2^k)`.
    fn from_str(s: &str) -> Result<Self, CoreError> {
        let err = |pos: usize, msg: &str| CoreError::Parse { position: pos, message: msg.into() };
        let slash = s.find('/').ok_or_else(|| err(s.len(), "expected '/'"))?;
        let num: BigUint = s[..slash]
            .trim()
            .parse()
            .map_err(|_| err(0, "invalid numerator"))?;
        let rest = s[slash + 1..].trim();
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| err(slash + 1, "expected '(q*2^k)'"))?;
        let star = inner.find('*').ok_or_else(|| err(slash + 1, "expected '*'"))?;
        let q: u64 = inner[..star]
            .trim()
            .parse()
            .map_err(|_| err(slash + 1, "invalid q"))?;
        let exp = inner[star + 1..]
            .trim()
            .strip_prefix("2^")
            .ok_or_else(|| err(slash + 1, "expected '2^k'"))?;
        let k: u32 = exp.trim().parse().map_err(|_| err(slash + 1, "invalid exponent"))?;
        Dyadic::new(num, k, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(num: u64, k: u32, q: u64) -> Dyadic {
        Dyadic::new(BigUint::from(num), k, q).unwrap()
    }

    #[test]
    fn canonical_form_strips_twos() {
        let x = d(6, 3, 3); // 6/(3*2^3) = 3/(3*2^2)
        assert_eq!(x.numerator(), &BigUint::from(3u8));
        assert_eq!(x.log2_den(), 2);
    }

    #[test]
    fn carry_step_matches_binary_increment() {
        // On q = 1 the map is the dyadic odometer: x and step(x) read in
        // binary (LSB first) differ by adding 1 with carry.
        for num in 0..64u64 {
            let x = d(num, 6, 1);
            let y = x.carry_step();
            let bits = |v: &Dyadic, len: u32| -> Vec<bool> {
                let n = v.lifted_num(len);
                // digit j of x = 0.b1 b2 b3... is bit (len - 1 - j) of the numerator
                (0..len).map(|j| n.bit((len - 1 - j) as u64)).collect()
            };
            let xb = bits(&x, 8);
            let mut expect = xb.clone();
            for b in expect.iter_mut() {
                if *b {
                    *b = false;
                } else {
                    *b = true;
                    break;
                }
            }
            assert_eq!(bits(&y, 8), expect, "num = {num}");
        }
    }

    #[test]
    fn carry_step_frozen_points() {
        assert_eq!(d(0, 0, 1).carry_step(), d(1, 1, 1)); // 0 -> 1/2
        assert_eq!(d(1, 1, 1).carry_step(), d(1, 2, 1)); // 1/2 -> 1/4
        assert_eq!(d(3, 2, 1).carry_step(), d(1, 3, 1)); // 3/4 -> 1/8
    }

    #[test]
    fn branch_indices() {
        assert_eq!(d(0, 0, 1).carry_branch(), 1); // [0, 1/2)
        assert_eq!(d(1, 1, 1).carry_branch(), 2); // [1/2, 3/4)
        assert_eq!(d(3, 2, 1).carry_branch(), 3);
    }

    #[test]
    fn branch_on_q3_points() {
        assert_eq!(d(1, 1, 3).carry_branch(), 1); // 1/6
        assert_eq!(d(5, 1, 3).carry_branch(), 3); // 5/6 in [3/4, 7/8)
        assert_eq!(d(11, 2, 3).carry_branch(), 4); // 11/12 in [7/8, 15/16)
    }

    #[test]
    fn ordering_is_value_based() {
        assert!(d(1, 1, 3) < d(1, 0, 3)); // 1/6 < 1/3
        assert_eq!(d(2, 1, 3), d(1, 0, 3)); // 2/6 = 1/3
        assert_eq!(d(1, 1, 2), d(1, 2, 1)); // 1/4 across different q
    }

    #[test]
    fn text_round_trip() {
        let x = d(5, 3, 3);
        assert_eq!(x.to_string(), "5/(3*2^3)");
        assert_eq!("5/(3*2^3)".parse::<Dyadic>().unwrap(), x);
        assert_eq!("0/(7*2^0)".parse::<Dyadic>().unwrap(), Dyadic::zero(7));
    }

    #[test]
    fn rejects_out_of_range() {
        // The closed endpoint 1 is representable; anything beyond is not.
        assert!(Dyadic::new(BigUint::from(12u8), 2, 3).is_ok());
        assert!("13/(3*2^2)".parse::<Dyadic>().is_err());
    }
}
