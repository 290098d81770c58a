//! Ordered Bratteli diagrams built from the renormalization data, tower
//! heights, the Vershik successor map, and the coding consistency check.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::matrix::IntegerMatrix;
use crate::odometer::RotatedOdometer;
use crate::renorm::{renorm_sequence, RenormSeq, Substitution};

/// Tower heights at level n: `heights(seq, n)[i]` counts the root paths to
/// vertex i on level n of the full diagram, i.e. the length of
/// chi_1 ∘ .. ∘ chi_(n-1) applied to letter i. Level 1 is all ones.
pub fn heights(seq: &RenormSeq, level: usize) -> Vec<BigUint> {
    assert!(level >= 1);
    let mut h = vec![BigUint::one(); seq.q];
    for m in 1..level {
        h = seq.matrix_at(m).mul_vec(&h);
    }
    h
}

/// Prefix of the one-sided coding fixed point: the limit of
/// chi_1 ∘ .. ∘ chi_m applied to letter 0.
///
/// Fails with [`CoreError::FixedPointStalled`] when the composed words stop
/// growing (then the limit word is finite and no infinite coding exists).
pub fn fixed_point_prefix(seq: &RenormSeq, len: usize) -> Result<Vec<u8>> {
    // Composed words are truncated at `len` letters: prefixes of a
    // concatenation only depend on prefixes of the pieces, and some letters
    // grow exponentially faster than letter 0 ever needs.
    let cap = |chi: &Substitution| {
        Substitution::new(
            chi.words().iter().map(|w| w[..w.len().min(len.max(1))].to_vec()).collect(),
        )
    };
    let mut comp = cap(seq.chi_at(1));
    let mut m = 1usize;
    let mut stalled_for = 0usize;
    while comp.word(0).len() < len {
        let last = comp.word(0).len();
        m += 1;
        comp = cap(&comp.compose(seq.chi_at(m)));
        if comp.word(0).len() == last {
            stalled_for += 1;
            if m > seq.preperiod && stalled_for >= seq.period {
                return Err(CoreError::FixedPointStalled { reached: last });
            }
        } else {
            stalled_for = 0;
        }
    }
    Ok(comp.word(0)[..len].to_vec())
}

/// Letters reachable from 0 by iterating the substitution of one full
/// period: the alphabet of the minimal subsystem.
pub fn minimal_alphabet(seq: &RenormSeq) -> Vec<u8> {
    let chi = period_substitution(seq);
    let q = seq.q;
    let mut in_set = vec![false; q];
    in_set[0] = true;
    loop {
        let mut changed = false;
        for i in 0..q {
            if !in_set[i] {
                continue;
            }
            for &l in chi.word(i) {
                if !in_set[l as usize] {
                    in_set[l as usize] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..q).filter(|&i| in_set[i]).map(|i| i as u8).collect()
}

/// Composition of the substitutions across one full period,
/// chi_(k0+1) ∘ .. ∘ chi_(k0+p0).
pub fn period_substitution(seq: &RenormSeq) -> Substitution {
    let k0 = seq.preperiod;
    let mut comp = seq.chi_at(k0 + 1).clone();
    for m in k0 + 2..=k0 + seq.period {
        comp = comp.compose(seq.chi_at(m));
    }
    comp
}

/// Stationary telescoped form: `matrix` is the product of the count
/// matrices across one period, `seed` the height vector accumulated over
/// the preperiod (all ones when the sequence is stationary from the start).
/// Heights at period boundaries are matrix^j * seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TelescopedSystem {
    pub matrix: IntegerMatrix,
    pub seed: Vec<BigUint>,
}

pub fn telescope(seq: &RenormSeq) -> TelescopedSystem {
    let k0 = seq.preperiod;
    let mut b = IntegerMatrix::identity(seq.q);
    for m in k0 + 1..=k0 + seq.period {
        b = seq.matrix_at(m).mul(&b);
    }
    let mut seed = vec![BigUint::one(); seq.q];
    for m in 1..=k0 {
        seed = seq.matrix_at(m).mul_vec(&seed);
    }
    TelescopedSystem { matrix: b, seed }
}

/// Vertices of level k that survive at every deeper resolution: letters
/// that keep occurring in chi_k ∘ .. ∘ chi_m for all m. These carry the
/// aperiodic part of the system; on covering systems this is the full
/// alphabet at every level.
pub fn stable_letters(seq: &RenormSeq, level: usize) -> Vec<u8> {
    let q = seq.q;
    // Boolean row masks of the product M_m * .. * M_level.
    let bool_rows = |mat: &IntegerMatrix| -> Vec<u64> {
        (0..q)
            .map(|i| {
                (0..q)
                    .filter(|&j| !num_traits::Zero::is_zero(mat.get(i, j)))
                    .fold(0u64, |acc, j| acc | 1 << j)
            })
            .collect()
    };
    let letters_of = |p: &[u64]| -> u64 { p.iter().fold(0, |a, &r| a | r) };
    let mut p = bool_rows(seq.matrix_at(level));
    let mut m = level;
    let mut seen: HashMap<(usize, Vec<u64>), ()> = HashMap::new();
    loop {
        let phase = seq.record_index(m + 1);
        if m > seq.preperiod && seen.insert((phase, p.clone()), ()).is_some() {
            // The boolean product recurs with the same phase, so the letter
            // set is constant from here on (it is monotone nonincreasing).
            break;
        }
        m += 1;
        let next_rows = bool_rows(seq.matrix_at(m));
        // p <- bool(M_m * p)
        p = next_rows
            .iter()
            .map(|&row| {
                (0..q)
                    .filter(|&l| row & (1 << l) != 0)
                    .fold(0u64, |acc, l| acc | p[l])
            })
            .collect();
    }
    let mask = letters_of(&p);
    (0..q).filter(|&j| mask & (1 << j) != 0).map(|j| j as u8).collect()
}

/// An ordered diagram of finite depth. `levels[t]` lists the vertices of
/// level t+1 (ascending); `incoming[t]` is indexed parallel to
/// `levels[t+1]` and gives, for each vertex there, its ordered incoming
/// edge sources on level t+1 (the return word filtered to kept letters).
/// The root and its single edges to level 1 are implicit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderedDiagram {
    pub depth: usize,
    pub restricted: bool,
    pub levels: Vec<Vec<u8>>,
    pub incoming: Vec<Vec<Vec<u8>>>,
}

pub fn build_diagram(seq: &RenormSeq, depth: usize, restricted: bool) -> Result<OrderedDiagram> {
    if depth == 0 {
        return Err(CoreError::Precondition("diagram depth must be at least 1".into()));
    }
    let levels: Vec<Vec<u8>> = (1..=depth)
        .map(|k| {
            if restricted {
                stable_letters(seq, k)
            } else {
                (0..seq.q as u8).collect()
            }
        })
        .collect();
    let mut incoming = Vec::with_capacity(depth - 1);
    for t in 0..depth - 1 {
        let chi = seq.chi_at(t + 1);
        let keep = &levels[t];
        let level_in: Vec<Vec<u8>> = levels[t + 1]
            .iter()
            .map(|&v| {
                chi.word(v as usize)
                    .iter()
                    .copied()
                    .filter(|l| keep.contains(l))
                    .collect::<Vec<u8>>()
            })
            .collect();
        for (v, edges) in levels[t + 1].iter().zip(&level_in) {
            if edges.is_empty() {
                return Err(CoreError::Precondition(format!(
                    "vertex {v} at level {} has no incoming edges",
                    t + 2
                )));
            }
        }
        incoming.push(level_in);
    }
    Ok(OrderedDiagram { depth, restricted, levels, incoming })
}

impl OrderedDiagram {
    fn vertex_index(&self, t: usize, v: u8) -> usize {
        self.levels[t].iter().position(|&x| x == v).expect("vertex present at level")
    }

    pub fn incoming_edges(&self, t: usize, v: u8) -> &[u8] {
        &self.incoming[t][self.vertex_index(t + 1, v)]
    }

    /// Path counts per vertex at the deepest level.
    pub fn path_counts(&self) -> Vec<BigUint> {
        let mut h: Vec<BigUint> = vec![BigUint::one(); self.levels[0].len()];
        for t in 0..self.depth - 1 {
            h = self.incoming[t]
                .iter()
                .map(|edges| {
                    edges
                        .iter()
                        .map(|&src| h[self.vertex_index(t, src)].clone())
                        .sum()
                })
                .collect();
        }
        h
    }

    pub fn minimal_path(&self, final_vertex: u8) -> PathPrefix {
        self.extreme_path(final_vertex, false)
    }

    pub fn maximal_path(&self, final_vertex: u8) -> PathPrefix {
        self.extreme_path(final_vertex, true)
    }

    fn extreme_path(&self, final_vertex: u8, maximal: bool) -> PathPrefix {
        let d = self.depth;
        let mut vertices = vec![0u8; d];
        let mut ranks = vec![0usize; d.saturating_sub(1)];
        vertices[d - 1] = final_vertex;
        for t in (0..d - 1).rev() {
            let edges = self.incoming_edges(t, vertices[t + 1]);
            let r = if maximal { edges.len() - 1 } else { 0 };
            ranks[t] = r;
            vertices[t] = edges[r];
        }
        PathPrefix { vertices, ranks }
    }

    /// Successor in the Vershik order. Increments the lowest-level
    /// non-maximal edge and resets everything below it to minimal; a fully
    /// maximal path wraps to the minimal path into the next final vertex
    /// (cyclically), so the orbit is a single cycle through all paths.
    pub fn successor(&self, path: &PathPrefix) -> (PathPrefix, bool) {
        let d = self.depth;
        let mut p = path.clone();
        for t in 0..d.saturating_sub(1) {
            let edges = self.incoming_edges(t, p.vertices[t + 1]);
            if p.ranks[t] + 1 < edges.len() {
                p.ranks[t] += 1;
                p.vertices[t] = edges[p.ranks[t]];
                for s in (0..t).rev() {
                    let below = self.incoming_edges(s, p.vertices[s + 1]);
                    p.ranks[s] = 0;
                    p.vertices[s] = below[0];
                }
                return (p, false);
            }
        }
        let bottom = &self.levels[d - 1];
        let idx = self.vertex_index(d - 1, path.vertices[d - 1]);
        let next = bottom[(idx + 1) % bottom.len()];
        (self.minimal_path(next), true)
    }

    /// Deterministic DOT rendering, one rank row per level.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph diagram {\n  rankdir=TB;\n  node [shape=circle];\n");
        out.push_str("  root [shape=point];\n");
        for (t, level) in self.levels.iter().enumerate() {
            out.push_str("  { rank=same;");
            for &v in level {
                out.push_str(&format!(" \"L{}_{}\";", t + 1, v));
            }
            out.push_str(" }\n");
        }
        for &v in &self.levels[0] {
            out.push_str(&format!("  root -> \"L1_{v}\";\n"));
        }
        for (t, level_in) in self.incoming.iter().enumerate() {
            for (vi, edges) in level_in.iter().enumerate() {
                let target = self.levels[t + 1][vi];
                for (rank, &src) in edges.iter().enumerate() {
                    out.push_str(&format!(
                        "  \"L{}_{}\" -> \"L{}_{}\" [label=\"{}\"];\n",
                        t + 1,
                        src,
                        t + 2,
                        target,
                        rank
                    ));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A finite path from the root: `vertices[t]` on level t+1 and `ranks[t]`
/// the order rank of the edge arriving at `vertices[t+1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathPrefix {
    pub vertices: Vec<u8>,
    pub ranks: Vec<usize>,
}

/// Result of checking the symbolic coding three ways: the orbit itinerary
/// of 0, the substitution fixed point, and the Vershik orbit of the
/// minimal path all spell the same word.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodingCheck {
    pub steps: usize,
    pub depth_used: usize,
    pub itinerary_matches_fixed_point: bool,
    pub vershik_matches_fixed_point: bool,
    pub first_mismatch: Option<usize>,
}

impl CodingCheck {
    pub fn ok(&self) -> bool {
        self.itinerary_matches_fixed_point && self.vershik_matches_fixed_point
    }
}

/// Compares the first `steps` coding letters of the orbit of 0 against the
/// substitution fixed point and against the vertex trace of the Vershik
/// orbit started at the minimal path into vertex 0.
pub fn coding_check(sys: &RotatedOdometer, steps: usize) -> Result<CodingCheck> {
    let seq = renorm_sequence(sys)?;
    let word = fixed_point_prefix(&seq, steps)?;
    let itinerary = sys.orbit_itinerary(crate::dyadic::Dyadic::zero(sys.q() as u64), steps)?;
    let mut first_mismatch = None;
    for t in 0..steps {
        if itinerary.letters[t] != word[t] {
            first_mismatch = Some(t);
            break;
        }
    }
    let itinerary_ok = first_mismatch.is_none();

    // Pick a depth whose tower over vertex 0 is taller than the requested
    // prefix, so the Vershik orbit stays inside that tower (exact regime).
    let mut depth = 2usize;
    while heights(&seq, depth)[0] <= BigUint::from(steps) {
        depth += 1;
        if depth > 2048 {
            return Err(CoreError::Precondition(
                "tower heights stopped growing; no depth covers the requested prefix".into(),
            ));
        }
    }
    let diagram = build_diagram(&seq, depth, false)?;
    let mut path = diagram.minimal_path(0);
    let mut vershik_ok = true;
    for t in 0..steps {
        if path.vertices[0] != word[t] {
            vershik_ok = false;
            first_mismatch = first_mismatch.or(Some(t));
            break;
        }
        let (next, wrapped) = diagram.successor(&path);
        debug_assert!(!wrapped, "orbit left the tower before the prefix ended");
        path = next;
    }

    debug_assert!(itinerary.letters.len() > steps);
    Ok(CodingCheck {
        steps,
        depth_used: depth,
        itinerary_matches_fixed_point: itinerary_ok,
        vershik_matches_fixed_point: vershik_ok,
        first_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odometer::letters_to_string;
    use crate::perm::Permutation;

    fn seq_of(q: usize, cycles: &str) -> RenormSeq {
        let sys =
            RotatedOdometer::new(q, Permutation::parse(cycles, q).unwrap()).unwrap();
        renorm_sequence(&sys).unwrap()
    }

    #[test]
    fn heights_level_one_is_ones() {
        let seq = seq_of(5, "(02431)");
        assert_eq!(heights(&seq, 1), vec![BigUint::one(); 5]);
        let h2: Vec<u64> = heights(&seq, 2).iter().map(|h| u64::try_from(h).unwrap()).collect();
        assert_eq!(h2, vec![5, 3, 5, 24, 3]);
    }

    #[test]
    fn fixed_point_prefix_q3() {
        let seq = seq_of(3, "(012)");
        let w = fixed_point_prefix(&seq, 16).unwrap();
        assert_eq!(letters_to_string(&w), "0221001100110221");
    }

    #[test]
    fn power_of_two_fixed_point_is_all_zeros() {
        // q = 2 with the swap renormalizes to the identity after one level;
        // the orbit of 0 never leaves the first big interval.
        let seq = seq_of(2, "(01)");
        assert_eq!((seq.preperiod, seq.period), (1, 1));
        let w = fixed_point_prefix(&seq, 8).unwrap();
        assert_eq!(letters_to_string(&w), "00000000");
        let sys = RotatedOdometer::new(2, Permutation::parse("(01)", 2).unwrap()).unwrap();
        assert!(coding_check(&sys, 64).unwrap().ok());
    }

    #[test]
    fn minimal_alphabets() {
        assert_eq!(minimal_alphabet(&seq_of(3, "(012)")), vec![0, 1, 2]);
        assert_eq!(minimal_alphabet(&seq_of(5, "(01234)")), vec![0, 3]);
        assert_eq!(minimal_alphabet(&seq_of(5, "(02431)")), vec![0, 1, 2, 4]);
        assert_eq!(minimal_alphabet(&seq_of(7, "(0516234)")), vec![0, 1, 2, 3]);
        assert_eq!(minimal_alphabet(&seq_of(7, "(0361425)")), vec![0, 1, 2, 3, 5, 6]);
    }

    #[test]
    fn stable_letters_drop_transient_vertices() {
        // Non-covering stationary case: only five letters keep occurring.
        let seq = seq_of(7, "(0654321)");
        for level in 1..=4 {
            assert_eq!(stable_letters(&seq, level), vec![0, 1, 3, 4, 6]);
        }
        // Covering case: everything survives.
        let seq = seq_of(3, "(021)");
        assert_eq!(stable_letters(&seq, 1), vec![0, 1, 2]);
    }

    #[test]
    fn telescope_preperiod_seed() {
        let seq = seq_of(5, "(02413)");
        let t = telescope(&seq);
        let seed: Vec<u64> = t.seed.iter().map(|h| u64::try_from(h).unwrap()).collect();
        assert_eq!(seed, vec![6, 6, 6, 6, 6]);
    }

    #[test]
    fn diagram_path_counts_match_heights() {
        for (q, cycles) in [(3, "(012)"), (5, "(02431)"), (7, "(0361425)")] {
            let seq = seq_of(q, cycles);
            let d = build_diagram(&seq, 4, false).unwrap();
            assert_eq!(d.path_counts(), heights(&seq, 4));
        }
    }

    #[test]
    fn vershik_orbit_is_a_single_cycle() {
        let seq = seq_of(3, "(012)");
        let d = build_diagram(&seq, 2, false).unwrap();
        let total: BigUint = d.path_counts().iter().sum();
        assert_eq!(total, BigUint::from(12u8));
        let start = d.minimal_path(d.levels[1][0]);
        let mut path = start.clone();
        let mut count = 0usize;
        loop {
            let (next, _) = d.successor(&path);
            count += 1;
            path = next;
            if path == start {
                break;
            }
        }
        assert_eq!(count, 12);
    }

    #[test]
    fn extreme_paths_thread_through_fixed_letters() {
        let seq = seq_of(5, "(02431)");
        let d = build_diagram(&seq, 4, false).unwrap();
        for &v in &d.levels[3] {
            let min = d.minimal_path(v);
            let max = d.maximal_path(v);
            // All return words start with 0 and end with a common letter.
            for t in 0..3 {
                assert_eq!(min.vertices[t], 0);
                assert_eq!(max.vertices[t], 2);
            }
        }
    }

    #[test]
    fn coding_check_q3() {
        let sys = RotatedOdometer::new(3, Permutation::parse("(012)", 3).unwrap()).unwrap();
        let check = coding_check(&sys, 300).unwrap();
        assert!(check.ok(), "{check:?}");
    }

    #[test]
    fn dot_output_is_deterministic() {
        let seq = seq_of(3, "(021)");
        let d = build_diagram(&seq, 3, false).unwrap();
        let a = d.to_dot();
        let b = build_diagram(&seq, 3, false).unwrap().to_dot();
        assert_eq!(a, b);
        assert!(a.starts_with("digraph diagram {"));
        assert!(a.contains("\"L1_0\" -> \"L2_0\""));
    }
}
