//! Finite cell model of a rotated odometer.
//!
//! At resolution k the interval splits into `q * 2^(kN)` equal cells, and
//! F maps cell interiors to cell interiors except on the q cells that the
//! rotation sends into the carry region [1 - 2^(-kN), 1). The resulting
//! partial injection is the combinatorial engine behind renormalization.

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{CoreError, Result};
use crate::odometer::RotatedOdometer;

/// Default ceiling on the number of cells a single map may allocate.
pub const DEFAULT_CELL_LIMIT: usize = 1 << 26;

/// Partial injection on cells at resolution k.
///
/// `next[j]` is the image cell of cell j, undefined exactly on `h_cells`
/// (the rotation preimages of the top q cells). Cells `0..q` are the
/// left-edge cells of the big intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellMap {
    pub q: usize,
    pub n_exp: u32,
    pub resolution: u32,
    pub cell_count: usize,
    pub next: Vec<Option<usize>>,
    pub h_cells: Vec<usize>,
}

/// Maximal intervals of cells whose forward orbit never reaches the carry
/// region, i.e. the periodic part of the interval at this resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicRegion {
    pub resolution: u32,
    pub cell_count: usize,
    pub periodic_cells: usize,
    /// Disjoint maximal intervals [lo, hi) as exact endpoints.
    pub intervals: Vec<(Dyadic, Dyadic)>,
}

impl PeriodicRegion {
    /// Lebesgue measure of the region as a fraction periodic_cells/cell_count.
    pub fn measure(&self) -> f64 {
        self.periodic_cells as f64 / self.cell_count as f64
    }
}

impl CellMap {
    pub fn build(sys: &RotatedOdometer, resolution: u32) -> Result<CellMap> {
        Self::build_with_limit(sys, resolution, DEFAULT_CELL_LIMIT)
    }

    pub fn build_with_limit(
        sys: &RotatedOdometer,
        resolution: u32,
        limit: usize,
    ) -> Result<CellMap> {
        if resolution == 0 {
            return Err(CoreError::Precondition("resolution must be at least 1".into()));
        }
        let q = sys.q();
        let depth = resolution
            .checked_mul(sys.n_exp())
            .ok_or_else(|| CoreError::Precondition("resolution overflow".into()))?;
        let needed = (q as u128)
            .checked_shl(depth)
            .ok_or(CoreError::Capacity { needed: u128::MAX, limit })?;
        if needed > limit as u128 {
            return Err(CoreError::Capacity { needed, limit });
        }
        let cell_count = needed as usize;
        let block = 1usize << depth; // cells per big interval
        let perm = sys.perm();

        // Rotation on cell indices: block-wise shift.
        let rot = |j: usize| -> usize {
            let i = j / block;
            let delta = perm.apply(i) as i64 - i as i64;
            (j as i64 + delta * block as i64) as usize
        };

        let mut next = vec![None; cell_count];
        let mut h_cells = Vec::with_capacity(q);
        for j in 0..cell_count {
            let r = rot(j);
            if r >= cell_count - q {
                h_cells.push(j);
                continue;
            }
            // Carry branch n: r lies in [C - C/2^(n-1), C - C/2^n) with C = cell_count.
            let mut n = 1u32;
            while r < cell_count - (cell_count >> (n - 1)) || r >= cell_count - (cell_count >> n) {
                n += 1;
                debug_assert!(n <= depth, "branch search escaped resolution");
            }
            // a shifts branch n by -1 + 3*2^(-n).
            next[j] = Some(r + 3 * (q << (depth - n)) - cell_count);
        }
        debug_assert_eq!(h_cells.len(), q);
        Ok(CellMap { q, n_exp: sys.n_exp(), resolution, cell_count, next, h_cells })
    }

    /// Follows `next` from `start` until a carry cell is reached, yielding
    /// the visited cells including both endpoints.
    pub fn chain(&self, start: usize) -> Vec<usize> {
        let mut out = vec![start];
        let mut c = start;
        while let Some(n) = self.next[c] {
            c = n;
            out.push(c);
            assert!(out.len() <= self.cell_count, "chain exceeded cell count");
        }
        out
    }

    /// Cells never visited by the chains out of the left-edge cells; these
    /// lie on cycles of `next` and carry the periodic part of the map.
    pub fn unvisited_cells(&self) -> Vec<usize> {
        let mut visited = vec![false; self.cell_count];
        for start in 0..self.q {
            for c in self.chain(start) {
                visited[c] = true;
            }
        }
        (0..self.cell_count).filter(|&c| !visited[c]).collect()
    }
}

/// Periodic region of `sys` resolved at level k, as maximal exact intervals.
pub fn periodic_region(sys: &RotatedOdometer, resolution: u32) -> Result<PeriodicRegion> {
    periodic_region_with_limit(sys, resolution, DEFAULT_CELL_LIMIT)
}

pub fn periodic_region_with_limit(
    sys: &RotatedOdometer,
    resolution: u32,
    limit: usize,
) -> Result<PeriodicRegion> {
    let map = CellMap::build_with_limit(sys, resolution, limit)?;
    let cells = map.unvisited_cells();
    let depth = resolution * sys.n_exp();
    let q = sys.q() as u64;
    let endpoint = |cell: usize| -> Result<Dyadic> {
        Dyadic::new(num_bigint::BigUint::from(cell), depth, q)
    };
    let mut intervals = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for &c in &cells {
        match run {
            Some((lo, hi)) if hi + 1 == c => run = Some((lo, c)),
            Some((lo, hi)) => {
                intervals.push((endpoint(lo)?, endpoint(hi + 1)?));
                run = Some((c, c));
            }
            None => run = Some((c, c)),
        }
    }
    if let Some((lo, hi)) = run {
        intervals.push((endpoint(lo)?, endpoint(hi + 1)?));
    }
    Ok(PeriodicRegion {
        resolution,
        cell_count: map.cell_count,
        periodic_cells: cells.len(),
        intervals,
    })
}
