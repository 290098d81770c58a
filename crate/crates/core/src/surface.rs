//! Permutations induced by linear flows on the staircase-type translation
//! surface: the horizontal return permutation determined by a rational
//! slope, and the conjugate permutation seen by the vertical flow.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::perm::Permutation;

/// Pairing of the two first-return pictures for one slope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowSpec {
    pub q: usize,
    pub p: usize,
    pub horizontal: Permutation,
    pub vertical: Permutation,
}

/// First-return permutation of the slope-(q, p) flow on q intervals:
/// interval i is sent to interval (i + p) mod q.
pub fn slope_permutation(q: usize, p: usize) -> Result<Permutation> {
    if q == 0 {
        return Err(CoreError::Precondition("q must be positive".into()));
    }
    Permutation::from_images((0..q).map(|i| (i + p) % q).collect())
}

/// The permutation the vertical flow induces from the horizontal one: on
/// the first q symbols it is the conjugate s ∘ t⁻¹ ∘ π ∘ s⁻¹ with
/// s(i) = q - 1 - i and t(i) = i + (p mod q); symbols q..p stay fixed.
pub fn vertical_permutation(q: usize, perm: &Permutation, p: usize) -> Result<Permutation> {
    if q == 0 {
        return Err(CoreError::Precondition("q must be positive".into()));
    }
    if perm.q() != q {
        return Err(CoreError::Precondition(format!(
            "permutation acts on {} symbols, expected {q}",
            perm.q()
        )));
    }
    if p < q {
        return Err(CoreError::Precondition(format!("need p >= q, got p = {p}, q = {q}")));
    }
    let r = p % q;
    let s = |i: usize| q - 1 - i;
    let t_inv = |i: usize| (i + q - r) % q;
    let mut images: Vec<usize> = (0..p).collect();
    for (k, img) in images.iter_mut().enumerate().take(q) {
        *img = s(t_inv(perm.apply(s(k))));
    }
    Permutation::from_images(images)
}

/// Both return pictures for the slope-(q, p) flow.
pub fn flow_spec(q: usize, p: usize) -> Result<FlowSpec> {
    let horizontal = slope_permutation(q, p)?;
    let vertical = vertical_permutation(q, &horizontal, p.max(q))?;
    Ok(FlowSpec { q, p, horizontal, vertical })
}
