//! Spectral analysis of the telescoped substitution matrix: Frobenius
//! normal form, Perron data, invariant measure candidates, rational
//! eigenvalue (divisibility) scans, and the entropy upper bound.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::telescope;
use crate::error::{CoreError, Result};
use crate::matrix::{poly_string, IntegerMatrix};
use crate::odometer::NConvention;
use crate::renorm::{covering_status, PeriodicClass, RenormSeq};

/// Frobenius normal form: a relabeling that makes the matrix lower block
/// triangular with every diagonal block either strongly connected or a
/// single zero entry. The order is deterministic: among the blocks whose
/// successors are already placed, the one with the smallest member wins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrobeniusForm {
    /// Original indices in their new order (new index -> old index).
    pub order: Vec<usize>,
    /// Blocks in placed order; each block lists original indices ascending.
    pub blocks: Vec<Vec<usize>>,
    /// The relabeled (lower block triangular) matrix.
    pub matrix: IntegerMatrix,
}

pub fn frobenius_form(m: &IntegerMatrix) -> FrobeniusForm {
    let n = m.size();
    let adj = m.support_digraph();
    let comp = strongly_connected_components(&adj);
    let block_of: Vec<usize> = {
        let mut b = vec![0; n];
        for (ci, c) in comp.iter().enumerate() {
            for &v in c {
                b[v] = ci;
            }
        }
        b
    };
    // Condensation out-edges per block.
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); comp.len()];
    for (v, nbrs) in adj.iter().enumerate() {
        for &w in nbrs {
            if block_of[v] != block_of[w] && !out[block_of[v]].contains(&block_of[w]) {
                out[block_of[v]].push(block_of[w]);
            }
        }
    }
    // Place blocks so that every edge points from a later block to an
    // earlier one; ties broken by smallest member.
    let mut placed = vec![false; comp.len()];
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(comp.len());
    while blocks.len() < comp.len() {
        let choice = (0..comp.len())
            .filter(|&b| !placed[b] && out[b].iter().all(|&t| placed[t]))
            .min_by_key(|&b| *comp[b].iter().min().expect("nonempty block"))
            .expect("condensation is acyclic");
        placed[choice] = true;
        let mut members = comp[choice].clone();
        members.sort_unstable();
        blocks.push(members);
    }
    let order: Vec<usize> = blocks.iter().flatten().copied().collect();
    let matrix = m.restrict(&order);
    FrobeniusForm { order, blocks, matrix }
}

/// Tarjan's algorithm, iterative, components in discovery order.
fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0usize;
    let mut comps = Vec::new();
    // Explicit DFS stack of (vertex, next-edge position).
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut dfs = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut ei)) = dfs.last_mut() {
            if *ei == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*ei) {
                *ei += 1;
                if index[w] == usize::MAX {
                    dfs.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack nonempty");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
                dfs.pop();
                if let Some(&mut (u, _)) = dfs.last_mut() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    comps
}

/// Spectral data of a nonnegative integer matrix: exact characteristic
/// polynomial plus a floating-point spectral radius with its residuals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerronData {
    /// Monic characteristic polynomial, leading coefficient first, entries
    /// as decimal strings.
    pub char_poly: Vec<String>,
    pub char_poly_display: String,
    pub radius: f64,
    /// Power-iteration residual ||Av - radius * v||_inf / ||v||_inf.
    pub residual: f64,
    /// |p(radius)| normalized by the coefficient scale at the radius.
    pub poly_value: f64,
}

pub fn perron_data(m: &IntegerMatrix) -> PerronData {
    let coeffs = m.char_poly();
    let (radius, residual) = spectral_radius(m);
    let poly_value = normalized_poly_value(&coeffs, radius);
    PerronData {
        char_poly: coeffs.iter().map(BigInt::to_string).collect(),
        char_poly_display: poly_string(&coeffs),
        radius,
        residual,
        poly_value,
    }
}

/// Power iteration on A + I (the shift makes every class aperiodic without
/// moving the Perron root, which shifts by exactly one).
fn spectral_radius(m: &IntegerMatrix) -> (f64, f64) {
    let n = m.size();
    if n == 0 {
        return (0.0, 0.0);
    }
    let a = m.to_f64();
    let step = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| v[i] + (0..n).map(|j| a[i][j] * v[j]).sum::<f64>())
            .collect()
    };
    let mut v = vec![1.0; n];
    let mut lambda = 1.0f64;
    for _ in 0..200_000 {
        let w = step(&v);
        let norm = w.iter().cloned().fold(0.0f64, f64::max);
        if norm == 0.0 {
            return (0.0, 0.0);
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        if (norm - lambda).abs() <= 1e-13 * norm.max(1.0) {
            v = next;
            lambda = norm;
            break;
        }
        v = next;
        lambda = norm;
    }
    let w = step(&v);
    let residual = v
        .iter()
        .zip(&w)
        .map(|(x, y)| (y - lambda * x).abs())
        .fold(0.0f64, f64::max);
    (lambda - 1.0, residual)
}

fn normalized_poly_value(coeffs: &[BigInt], x: f64) -> f64 {
    let mut value = 0.0f64;
    let mut scale = 0.0f64;
    for c in coeffs {
        let cf = bigint_to_f64(c);
        value = value * x + cf;
        scale = scale * x.abs() + cf.abs();
    }
    if scale == 0.0 {
        0.0
    } else {
        value.abs() / scale.max(1.0)
    }
}

fn bigint_to_f64(c: &BigInt) -> f64 {
    c.to_f64().unwrap_or(if c.is_negative() { f64::MIN } else { f64::MAX })
}

/// One candidate invariant measure: a diagonal block with Perron root
/// above 1, together with a nonnegative left eigenvector of the full
/// telescoped matrix at that root (first support entry normalized to 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureCandidate {
    pub block: Vec<usize>,
    pub radius: f64,
    pub left_eigenvector: Vec<f64>,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedBlock {
    pub block: Vec<usize>,
    pub radius: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureReport {
    pub frobenius: FrobeniusForm,
    pub candidates: Vec<MeasureCandidate>,
    pub rejected: Vec<RejectedBlock>,
}

impl MeasureReport {
    pub fn count(&self) -> usize {
        self.candidates.len()
    }
}

pub fn measure_report(seq: &RenormSeq) -> MeasureReport {
    let b = telescope(seq).matrix;
    let frob = frobenius_form(&b);
    let mut candidates = Vec::new();
    let mut rejected = Vec::new();
    for block in &frob.blocks {
        let sub = b.restrict(block);
        let (radius, _) = spectral_radius(&sub);
        if radius <= 1.0 + 1e-9 {
            continue;
        }
        match left_eigenvector(&b, radius, block) {
            Ok((vector, support)) => candidates.push(MeasureCandidate {
                block: block.clone(),
                radius,
                left_eigenvector: vector,
                support,
            }),
            Err(reason) => rejected.push(RejectedBlock { block: block.clone(), radius, reason }),
        }
    }
    MeasureReport { frobenius: frob, candidates, rejected }
}

/// Inverse iteration on the transpose, seeded with the block indicator.
fn left_eigenvector(
    b: &IntegerMatrix,
    radius: f64,
    block: &[usize],
) -> std::result::Result<(Vec<f64>, Vec<usize>), String> {
    let n = b.size();
    let bf = b.to_f64();
    let mu = radius + 1e-8 * radius.max(1.0);
    // (B^T - mu I) in row-major.
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| bf[j][i] - if i == j { mu } else { 0.0 }).collect())
        .collect();
    let mut v = vec![0.0f64; n];
    for &i in block {
        v[i] = 1.0;
    }
    for _ in 0..100 {
        let Some(w) = lu_solve(&shifted, &v) else {
            return Err("shifted system became singular".into());
        };
        let norm = w.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        if !norm.is_finite() || norm == 0.0 {
            return Err("inverse iteration diverged".into());
        }
        v = w.iter().map(|x| x / norm).collect();
    }
    // Fix the overall sign by the largest-magnitude entry.
    let max = v.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    if max < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    let scale = v.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    for x in v.iter_mut() {
        if x.abs() < 1e-9 * scale {
            *x = 0.0;
        }
    }
    if v.iter().any(|&x| x < -1e-6 * scale) {
        return Err("left eigenvector is not nonnegative".into());
    }
    // Residual check against the exact matrix.
    let resid = (0..n)
        .map(|j| {
            let vb: f64 = (0..n).map(|i| v[i] * bf[i][j]).sum();
            (vb - radius * v[j]).abs()
        })
        .fold(0.0f64, f64::max);
    if resid > 1e-6 * scale.max(1.0) * radius.max(1.0) {
        return Err(format!("eigenvector residual {resid:.3e} too large"));
    }
    let support: Vec<usize> = (0..n).filter(|&i| v[i] > 0.0).collect();
    let first = support.first().copied().ok_or("eigenvector vanished")?;
    let pivot = v[first];
    let vector = v.iter().map(|x| x / pivot).collect();
    Ok((vector, support))
}

/// Dense LU solve with partial pivoting; `None` on exact singularity.
fn lu_solve(a: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x: Vec<f64> = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).expect("finite entries")
        })?;
        if m[pivot][col].abs() < f64::MIN_POSITIVE {
            return None;
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        for row in 0..col {
            x[row] -= m[row][col] * x[col];
        }
    }
    Some(x)
}

/// Whether Lebesgue measure is ergodic: exactly when no level of the
/// renormalization leaves periodic cells behind.
pub fn lebesgue_ergodic(seq: &RenormSeq) -> bool {
    covering_status(seq) == PeriodicClass::Empty
}

/// Which height vector seeds the divisibility iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SeedChoice {
    /// All-ones: heights of the full first level.
    #[default]
    Ones,
    /// The preperiod-accumulated heights from the telescoped form.
    Telescoped,
}

/// Outcome of iterating heights modulo a divisor under the period matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalEigenvalueCheck {
    pub divisor: u64,
    pub alphabet: Vec<u8>,
    /// Restrict the divisibility question to this letter when set.
    pub letter: Option<u8>,
    /// True when every height vector in the eventual cycle vanishes mod
    /// the divisor on the tracked letters.
    pub divisible: bool,
    pub transient: usize,
    pub cycle: usize,
    /// Distinct residues seen on the tracked letters in the cycle (capped).
    pub residues: Vec<u64>,
    /// A cycle vector witnessing failure, if any.
    pub witness: Option<Vec<u64>>,
}

/// Iterates the restricted period matrix on a height vector modulo
/// `divisor` and inspects the eventual cycle. The alphabet must be closed
/// under the period substitution (e.g. the full or the minimal alphabet).
pub fn rational_eigenvalue(
    seq: &RenormSeq,
    divisor: u64,
    alphabet: &[u8],
    seed: SeedChoice,
    letter: Option<u8>,
) -> Result<RationalEigenvalueCheck> {
    if divisor == 0 {
        return Err(CoreError::Precondition("divisor must be positive".into()));
    }
    if alphabet.is_empty() || alphabet.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::Precondition("alphabet must be nonempty and ascending".into()));
    }
    let tracked: Vec<usize> = match letter {
        Some(l) => {
            let p = alphabet.iter().position(|&a| a == l).ok_or_else(|| {
                CoreError::Precondition(format!("letter {l} not in the chosen alphabet"))
            })?;
            vec![p]
        }
        None => (0..alphabet.len()).collect(),
    };
    let tele = telescope(seq);
    let idx: Vec<usize> = alphabet.iter().map(|&a| a as usize).collect();
    for &i in &idx {
        if i >= seq.q {
            return Err(CoreError::Precondition(format!("letter {i} out of range")));
        }
    }
    let sub = tele.matrix.restrict(&idx);
    let k = idx.len();
    let a_mod: Vec<Vec<u64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    u64::try_from(sub.get(i, j) % divisor).expect("reduced entry fits u64")
                })
                .collect()
        })
        .collect();
    let start: Vec<u64> = match seed {
        SeedChoice::Ones => vec![1 % divisor; k],
        SeedChoice::Telescoped => idx
            .iter()
            .map(|&i| u64::try_from(&tele.seed[i] % divisor).expect("residue fits u64"))
            .collect(),
    };
    let step = |v: &Vec<u64>| -> Vec<u64> {
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| a_mod[i][j] * v[j] % divisor)
                    .fold(0u64, |acc, t| (acc + t) % divisor)
            })
            .collect()
    };

    // Brent cycle detection: constant memory even for long cycles.
    let (cycle, transient) = brent(&start, step);
    let mut at_cycle = start.clone();
    for _ in 0..transient {
        at_cycle = step(&at_cycle);
    }
    let mut divisible = true;
    let mut residues = std::collections::BTreeSet::new();
    let mut witness = None;
    let mut v = at_cycle;
    for _ in 0..cycle {
        let bad = tracked.iter().any(|&t| v[t] != 0);
        if bad {
            divisible = false;
            if witness.is_none() {
                witness = Some(v.clone());
            }
        }
        if residues.len() < 64 {
            for &t in &tracked {
                residues.insert(v[t]);
            }
        }
        v = step(&v);
    }
    Ok(RationalEigenvalueCheck {
        divisor,
        alphabet: alphabet.to_vec(),
        letter,
        divisible,
        transient,
        cycle,
        residues: residues.into_iter().collect(),
        witness,
    })
}

/// Brent's algorithm: returns (cycle length, transient length).
fn brent<T: Clone + PartialEq>(start: &T, f: impl Fn(&T) -> T) -> (usize, usize) {
    let mut power = 1usize;
    let mut lam = 1usize;
    let mut tortoise = start.clone();
    let mut hare = f(start);
    while tortoise != hare {
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = f(&hare);
        lam += 1;
    }
    let mut mu = 0usize;
    tortoise = start.clone();
    hare = start.clone();
    for _ in 0..lam {
        hare = f(&hare);
    }
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&hare);
        mu += 1;
    }
    (lam, mu)
}

/// Scan of divisors 2^1 .. 2^max_m.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DyadicScan {
    pub checks: Vec<RationalEigenvalueCheck>,
    pub all_divisible: bool,
    pub first_failure: Option<u32>,
}

pub fn dyadic_scan(
    seq: &RenormSeq,
    max_m: u32,
    alphabet: &[u8],
    seed: SeedChoice,
    letter: Option<u8>,
) -> Result<DyadicScan> {
    let ms: Vec<u32> = (1..=max_m).collect();
    #[cfg(feature = "parallel")]
    let checks: Vec<RationalEigenvalueCheck> = ms
        .par_iter()
        .map(|&m| rational_eigenvalue(seq, 1u64 << m, alphabet, seed, letter))
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let checks: Vec<RationalEigenvalueCheck> = ms
        .iter()
        .map(|&m| rational_eigenvalue(seq, 1u64 << m, alphabet, seed, letter))
        .collect::<Result<_>>()?;
    let first_failure = checks
        .iter()
        .zip(&ms)
        .find(|(c, _)| !c.divisible)
        .map(|(_, &m)| m);
    Ok(DyadicScan { checks, all_divisible: first_failure.is_none(), first_failure })
}

/// Entropy upper bound data: at cylinder scale 2^(-kN) the coding admits
/// at most m_k = k (2^N - 1) q distinct subwords, so the scaled word
/// complexity bounds entropy by ln(m_k) / 2^(kN), which tends to zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub k: u32,
    pub subwords: u64,
    pub scale_log2: u32,
    pub value: f64,
}

pub fn entropy_bound(q: usize, convention: NConvention, k_max: u32) -> Vec<EntropyPoint> {
    let n = convention.exponent(q);
    (1..=k_max)
        .map(|k| {
            let subwords = k as u64 * ((1u64 << n) - 1) * q as u64;
            let scale_log2 = k * n;
            let value = (subwords as f64).ln() / (scale_log2 as f64).exp2();
            EntropyPoint { k, subwords, scale_log2, value }
        })
        .collect()
}
