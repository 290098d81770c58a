//! Renormalization of a rotated odometer into a sequence of substitutions.
//!
//! One level of renormalization traces the cell chains of the level-1 cell
//! map: the chain out of left-edge cell i spells a return word over the big
//! intervals, and the carry cell it ends on determines where interval i is
//! rotated at the next level. Because there are finitely many permutations
//! the level sequence is eventually periodic, and everything downstream
//! (matrices, heights, diagrams, spectra) is read off the resulting data.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cells::CellMap;
use crate::error::Result;
use crate::matrix::IntegerMatrix;
use crate::odometer::{letters_to_string, RotatedOdometer};
use crate::perm::Permutation;

/// A substitution on the alphabet {0, .., q-1}: letter i maps to `words[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    words: Vec<Vec<u8>>,
}

impl Substitution {
    pub fn new(words: Vec<Vec<u8>>) -> Self {
        Substitution { words }
    }

    pub fn alphabet_len(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, letter: usize) -> &[u8] {
        &self.words[letter]
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    pub fn word_string(&self, letter: usize) -> String {
        letters_to_string(&self.words[letter])
    }

    /// Count matrix: entry (i, j) is the number of occurrences of letter j
    /// in the word of letter i.
    pub fn matrix(&self) -> IntegerMatrix {
        let q = self.words.len();
        let mut m = IntegerMatrix::zero(q);
        for (i, word) in self.words.iter().enumerate() {
            for &l in word {
                m.add_assign_at(i, l as usize, 1);
            }
        }
        m
    }

    /// Composition (self ∘ other)(i) = self applied letterwise to other(i).
    /// The count matrix of the result is matrix(other) * matrix(self).
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let words = other
            .words
            .iter()
            .map(|w| w.iter().flat_map(|&l| self.words[l as usize].iter().copied()).collect())
            .collect();
        Substitution { words }
    }
}

/// One level of the renormalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelRecord {
    /// Level index k >= 1.
    pub level: usize,
    /// Permutation of the rescaled system produced at this level.
    pub perm: Permutation,
    /// Return-word substitution of this level.
    pub chi: Substitution,
    /// Count matrix of `chi`.
    pub matrix: IntegerMatrix,
    /// Return times |chi(i)|.
    pub return_times: Vec<usize>,
    /// True when the chains cover every cell of the level-1 model.
    pub covering: bool,
    /// Cells missed by the chains (periodic at this level), by index.
    pub unvisited_cells: Vec<usize>,
}

/// Eventually periodic renormalization data: records for levels
/// 1 ..= preperiod + period, with later levels repeating the periodic part.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenormSeq {
    pub q: usize,
    pub n_exp: u32,
    /// Initial permutation (level 0).
    pub perm: Permutation,
    /// Preperiod length k0 (number of non-repeating levels).
    pub preperiod: usize,
    /// Period length p0 >= 1.
    pub period: usize,
    pub records: Vec<LevelRecord>,
}

/// Classification of the periodic part of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicClass {
    /// Every level covers: no periodic points at all.
    Empty,
    /// Non-covering levels occur only in the preperiod: finitely many
    /// periodic cell intervals.
    Finite,
    /// A level inside the period fails to cover: periodic intervals appear
    /// at infinitely many scales.
    Infinite,
}

/// One renormalization step: the next-level permutation and the return-word
/// substitution, derived purely from the level-1 cell chains.
pub fn renorm_step(sys: &RotatedOdometer) -> Result<(Permutation, Substitution)> {
    let r = renorm_level(sys, 0)?;
    Ok((r.perm, r.chi))
}

fn renorm_level(sys: &RotatedOdometer, level: usize) -> Result<LevelRecord> {
    let q = sys.q();
    let map = CellMap::build(sys, 1)?;
    let block = map.cell_count / q;
    let perm = sys.perm();
    let top_offset = |cell: usize| -> usize {
        // Which of the q carry targets the terminal cell rotates onto.
        let i = cell / block;
        let delta = perm.apply(i) as i64 - i as i64;
        let r = (cell as i64 + delta * block as i64) as usize;
        r - (map.cell_count - q)
    };

    let mut images = vec![0usize; q];
    let mut words = Vec::with_capacity(q);
    let mut visited = vec![false; map.cell_count];
    for i in 0..q {
        let chain = map.chain(i);
        let word: Vec<u8> = chain.iter().map(|&c| (c / block) as u8).collect();
        for &c in &chain {
            visited[c] = true;
        }
        images[i] = top_offset(*chain.last().expect("chain is nonempty"));
        words.push(word);
    }
    let unvisited: Vec<usize> = (0..map.cell_count).filter(|&c| !visited[c]).collect();
    let chi = Substitution::new(words);
    let matrix = chi.matrix();
    let return_times = chi.words().iter().map(Vec::len).collect();
    Ok(LevelRecord {
        level,
        perm: Permutation::from_images(images)?,
        chi,
        matrix,
        return_times,
        covering: unvisited.is_empty(),
        unvisited_cells: unvisited,
    })
}

/// Runs renormalization from `sys` until the permutation sequence repeats,
/// returning one full preperiod plus one period of level records.
pub fn renorm_sequence(sys: &RotatedOdometer) -> Result<RenormSeq> {
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut records: Vec<LevelRecord> = Vec::new();
    let mut current = sys.clone();
    seen.insert(current.perm().images().to_vec(), 0);
    loop {
        let level = records.len() + 1;
        let mut rec = renorm_level(&current, level)?;
        rec.level = level;
        let next_images = rec.perm.images().to_vec();
        let next = RotatedOdometer::with_convention(sys.q(), rec.perm.clone(), sys.convention())?;
        records.push(rec);
        if let Some(&j) = seen.get(&next_images) {
            // Permutation at step `records.len()` equals the one at step j.
            let preperiod = j;
            let period = records.len() - j;
            records.truncate(preperiod + period);
            return Ok(RenormSeq {
                q: sys.q(),
                n_exp: sys.n_exp(),
                perm: sys.perm().clone(),
                preperiod,
                period,
                records,
            });
        }
        seen.insert(next_images, records.len());
        current = next;
    }
}

impl RenormSeq {
    /// Index into `records` for an arbitrary level m >= 1, using the
    /// periodic extension beyond the stored prefix.
    pub fn record_index(&self, level: usize) -> usize {
        assert!(level >= 1);
        if level <= self.records.len() {
            level - 1
        } else {
            self.preperiod + (level - self.preperiod - 1) % self.period
        }
    }

    pub fn record_at(&self, level: usize) -> &LevelRecord {
        &self.records[self.record_index(level)]
    }

    pub fn chi_at(&self, level: usize) -> &Substitution {
        &self.record_at(level).chi
    }

    pub fn matrix_at(&self, level: usize) -> &IntegerMatrix {
        &self.record_at(level).matrix
    }

    /// Full cell count of the level-1 model, q * 2^N.
    pub fn full_cell_count(&self) -> usize {
        self.q << self.n_exp
    }
}

pub fn covering_status(seq: &RenormSeq) -> PeriodicClass {
    let in_period = |r: &&LevelRecord| r.level > seq.preperiod;
    if seq.records.iter().filter(in_period).any(|r| !r.covering) {
        PeriodicClass::Infinite
    } else if seq.records.iter().any(|r| !r.covering) {
        PeriodicClass::Finite
    } else {
        PeriodicClass::Empty
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(q: usize, cycles: &str) -> RotatedOdometer {
        RotatedOdometer::new(q, Permutation::parse(cycles, q).unwrap()).unwrap()
    }

    fn step_words(q: usize, cycles: &str) -> (String, Vec<String>) {
        let (perm, chi) = renorm_step(&sys(q, cycles)).unwrap();
        let words = (0..q).map(|i| chi.word_string(i)).collect();
        (perm.cycle_string(), words)
    }

    #[test]
    fn q1_step_is_doubling() {
        let (perm, words) = step_words(1, "(0)");
        assert_eq!(perm, "(0)");
        assert_eq!(words, vec!["00"]);
    }

    #[test]
    fn q3_cycle_step() {
        let (perm, words) = step_words(3, "(012)");
        assert_eq!(perm, "(012)");
        assert_eq!(words, vec!["0221", "0221", "0011"]);
    }

    #[test]
    fn q3_reverse_cycle_step() {
        let (perm, words) = step_words(3, "(021)");
        assert_eq!(perm, "(021)");
        assert_eq!(words, vec!["0112211220", "0", "0"]);
    }

    #[test]
    fn words_share_structure() {
        // Every return word starts with its own left-edge letter 0 reading,
        // i.e. first letter equals the chain start's big interval.
        for cycles in ["(012)", "(021)"] {
            let (_, chi) = renorm_step(&sys(3, cycles)).unwrap();
            for i in 0..3 {
                assert_eq!(chi.word(i)[0], 0);
            }
        }
    }

    #[test]
    fn stationary_sequence_q3() {
        let seq = renorm_sequence(&sys(3, "(012)")).unwrap();
        assert_eq!((seq.preperiod, seq.period), (0, 1));
        assert_eq!(seq.records.len(), 1);
        assert_eq!(covering_status(&seq), PeriodicClass::Empty);
        // Periodic extension repeats the single record.
        assert_eq!(seq.record_index(1), 0);
        assert_eq!(seq.record_index(7), 0);
    }

    #[test]
    fn preperiodic_sequence_q5() {
        let seq = renorm_sequence(&sys(5, "(02413)")).unwrap();
        assert_eq!((seq.preperiod, seq.period), (1, 1));
        assert_eq!(seq.records[0].perm.cycle_string(), "(01234)");
        assert_eq!(seq.records[1].perm.cycle_string(), "(01234)");
        // Level 1 does not cover, every later level does.
        assert!(!seq.records[0].covering);
        assert!(seq.records[1].covering);
        assert_eq!(covering_status(&seq), PeriodicClass::Finite);
        let sum: usize = seq.records[0].return_times.iter().sum();
        assert_eq!(sum, 30);
    }

    #[test]
    fn infinite_periodic_class_q7() {
        let seq = renorm_sequence(&sys(7, "(0654321)")).unwrap();
        assert_eq!((seq.preperiod, seq.period), (0, 1));
        assert_eq!(covering_status(&seq), PeriodicClass::Infinite);
        let sum: usize = seq.records[0].return_times.iter().sum();
        assert_eq!(sum, 14);
        assert_eq!(seq.full_cell_count(), 56);
    }

    #[test]
    fn composition_matrix_identity() {
        let (_, chi) = renorm_step(&sys(3, "(012)")).unwrap();
        let twice = chi.compose(&chi);
        assert_eq!(twice.matrix(), chi.matrix().mul(&chi.matrix()));
        assert_eq!(twice.word_string(0), "0221001100110221");
    }
}
