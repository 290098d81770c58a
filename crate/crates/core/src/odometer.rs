//! The rotated odometer F = a ∘ R: a finite rotation R of q equal
//! subintervals followed by the dyadic add-with-carry map a.

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{CoreError, Result};
use crate::perm::Permutation;

/// How the carry resolution exponent N is chosen from q.
///
/// `Geq` picks the least N >= 1 with 2^N >= q, `Strict` the least with
/// 2^N > q. The two differ exactly when q is a power of two; `Geq` is the
/// default used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NConvention {
    #[default]
    Geq,
    Strict,
}

impl NConvention {
    pub fn exponent(self, q: usize) -> u32 {
        let mut n = 1u32;
        loop {
            let pow = 1u128 << n;
            let ok = match self {
                NConvention::Geq => pow >= q as u128,
                NConvention::Strict => pow > q as u128,
            };
            if ok {
                return n;
            }
            n += 1;
        }
    }
}

/// A rotated odometer: q subintervals permuted by `perm`, then one
/// add-with-carry step. `n_exp` is the carry resolution exponent N.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotatedOdometer {
    q: usize,
    perm: Permutation,
    n_exp: u32,
    convention: NConvention,
}

/// A finite orbit with the exact visited points and their coding letters
/// (the big interval each point lies in).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitItinerary {
    pub start: Dyadic,
    pub points: Vec<Dyadic>,
    pub letters: Vec<u8>,
}

impl OrbitItinerary {
    pub fn word(&self) -> String {
        letters_to_string(&self.letters)
    }
}

pub fn letters_to_string(letters: &[u8]) -> String {
    letters.iter().map(|&l| char::from_digit(l as u32, 10).unwrap_or('?')).collect()
}

impl RotatedOdometer {
    pub fn new(q: usize, perm: Permutation) -> Result<Self> {
        Self::with_convention(q, perm, NConvention::Geq)
    }

    pub fn with_convention(q: usize, perm: Permutation, convention: NConvention) -> Result<Self> {
        if q == 0 {
            return Err(CoreError::Precondition("q must be positive".into()));
        }
        if perm.q() != q {
            return Err(CoreError::Precondition(format!(
                "permutation acts on {} symbols, expected {q}",
                perm.q()
            )));
        }
        let n_exp = convention.exponent(q);
        Ok(RotatedOdometer { q, perm, n_exp, convention })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn n_exp(&self) -> u32 {
        self.n_exp
    }

    pub fn convention(&self) -> NConvention {
        self.convention
    }

    /// True when q is a power of two: the renormalization degenerates to the
    /// plain odometer picture and several derived reports are trivial.
    pub fn is_power_of_two_degenerate(&self) -> bool {
        self.q.is_power_of_two()
    }

    /// The interval rotation R: shifts x from big interval i to perm(i).
    pub fn rotation_map(&self, x: &Dyadic) -> Dyadic {
        debug_assert_eq!(x.q(), self.q as u64);
        let i = x.big_interval();
        let delta = self.perm.apply(i) as i64 - i as i64;
        x.shift_big_intervals(delta)
    }

    /// The add-with-carry map a alone.
    pub fn vnk_map(&self, x: &Dyadic) -> Dyadic {
        x.carry_step()
    }

    /// One step of F = a ∘ R.
    pub fn rotated_map(&self, x: &Dyadic) -> Dyadic {
        self.vnk_map(&self.rotation_map(x))
    }

    /// Exact orbit of `start` for `steps` applications of F, recording the
    /// coding letter of each visited point (including the start).
    pub fn orbit_itinerary(&self, start: Dyadic, steps: usize) -> Result<OrbitItinerary> {
        if start.q() != self.q as u64 {
            return Err(CoreError::Precondition(format!(
                "start point has denominator base {}, expected {}",
                start.q(),
                self.q
            )));
        }
        let mut points = Vec::with_capacity(steps + 1);
        let mut letters = Vec::with_capacity(steps + 1);
        let mut x = start.clone();
        for _ in 0..=steps {
            letters.push(x.big_interval() as u8);
            points.push(x.clone());
            x = self.rotated_map(&x);
        }
        Ok(OrbitItinerary { start, points, letters })
    }
}
