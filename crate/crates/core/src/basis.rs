//! Many-boson Fock basis.
//!
//! States are occupation vectors `(n_1, ..., n_M)` with `Σ n_s = N`, listed in
//! lexicographically *decreasing* order: `(N, 0, ..., 0)` comes first and
//! `(0, ..., 0, N)` last. Lookup uses combinatorial ranking, so it costs
//! `O(M)` and needs no hashing.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Occupations are stored as `u8`.
pub const MAX_PARTICLES: usize = u8::MAX as usize;

/// A Fock state: the number of bosons in each single-particle level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OccupationVector(Vec<u8>);

impl OccupationVector {
    pub fn new(occupations: Vec<u8>) -> Self {
        OccupationVector(occupations)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn n_levels(&self) -> usize {
        self.0.len()
    }

    pub fn n_particles(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }
}

impl From<&[u8]> for OccupationVector {
    fn from(s: &[u8]) -> Self {
        OccupationVector(s.to_vec())
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_occupations(f, &self.0)
    }
}

fn write_occupations<W: fmt::Write>(w: &mut W, occ: &[u8]) -> fmt::Result {
    for (i, n) in occ.iter().enumerate() {
        if i > 0 {
            w.write_char(' ')?;
        }
        write!(w, "{n}")?;
    }
    Ok(())
}

/// Number of ways to put `N` bosons in `M` levels, `(N+M-1)! / (N! (M-1)!)`.
///
/// Computed with the exact multiplicative recurrence in `u128`, so the only
/// failure is a result that does not fit in `usize`.
pub fn basis_dimension(n_particles: usize, n_levels: usize) -> Result<usize> {
    if n_particles == 0 || n_levels == 0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "basis needs N >= 1 and M >= 1, got N={n_particles}, M={n_levels}"
        )));
    }
    let too_large = || Error::BasisTooLarge {
        n_particles,
        n_levels,
    };
    // C(N+M-1, k) with k = min(N, M-1); every partial product is itself a
    // binomial coefficient, so the division is exact.
    let top = (n_particles + n_levels - 1) as u128;
    let k = n_particles.min(n_levels - 1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(top - k + i).ok_or_else(too_large)? / i;
    }
    usize::try_from(acc).map_err(|_| too_large())
}

/// The full `N`-boson basis on `M` levels, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    n_particles: usize,
    n_levels: usize,
    /// Row-major `len × M` occupation table.
    occupations: Vec<u8>,
    /// `counts[r * (M + 1) + l]` = number of ways to place `r` bosons in `l` levels.
    counts: Vec<usize>,
}

impl FockBasis {
    /// Enumerate every occupation vector once, in canonical order.
    pub fn enumerate(n_particles: usize, n_levels: usize) -> Result<Self> {
        if n_particles > MAX_PARTICLES {
            return Err(Error::InvalidParameter(alloc::format!(
                "at most {MAX_PARTICLES} particles are supported, got {n_particles}"
            )));
        }
        let dim = basis_dimension(n_particles, n_levels)?;
        let cells = dim.checked_mul(n_levels).ok_or(Error::BasisTooLarge {
            n_particles,
            n_levels,
        })?;

        let mut occupations = Vec::with_capacity(cells);
        let mut cur = alloc::vec![0u8; n_levels];
        cur[0] = n_particles as u8;
        loop {
            occupations.extend_from_slice(&cur);
            // Next vector in decreasing lexicographic order: take one particle
            // from the rightmost occupied level before the last one and pile
            // everything to its right onto the following level.
            let Some(i) = (0..n_levels - 1).rev().find(|&i| cur[i] > 0) else {
                break;
            };
            let tail: u8 = cur[i + 1..].iter().sum();
            cur[i] -= 1;
            cur[i + 1..].iter_mut().for_each(|n| *n = 0);
            cur[i + 1] = tail + 1;
        }
        debug_assert_eq!(occupations.len(), cells);

        Ok(FockBasis {
            n_particles,
            n_levels,
            occupations,
            counts: count_table(n_particles, n_levels),
        })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// Hilbert-space dimension `N_H`.
    pub fn len(&self) -> usize {
        self.occupations.len() / self.n_levels
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    /// Occupations of state `index`.
    ///
    /// Panics if `index >= self.len()`.
    pub fn state(&self, index: usize) -> &[u8] {
        let m = self.n_levels;
        &self.occupations[index * m..(index + 1) * m]
    }

    pub fn occupation_vector(&self, index: usize) -> OccupationVector {
        OccupationVector::from(self.state(index))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.occupations.chunks_exact(self.n_levels)
    }

    /// Position of `state` in the basis.
    pub fn lookup(&self, state: &[u8]) -> Result<usize> {
        if state.len() != self.n_levels {
            return Err(self.not_found(state));
        }
        let total: usize = state.iter().map(|&n| n as usize).sum();
        if total != self.n_particles {
            return Err(self.not_found(state));
        }
        Ok(self.rank_unchecked(state))
    }

    /// Rank of a vector already known to have length `M` and sum `N`.
    pub(crate) fn rank_unchecked(&self, state: &[u8]) -> usize {
        let m = self.n_levels;
        let stride = m + 1;
        let mut remaining = self.n_particles;
        let mut rank = 0;
        for (i, &n) in state[..m - 1].iter().enumerate() {
            let n = n as usize;
            if n < remaining {
                // All vectors sharing the prefix but holding more particles at
                // position `i` precede this one.
                rank += self.counts[(remaining - n - 1) * stride + (m - i)];
            }
            remaining -= n;
        }
        rank
    }

    /// Text listing, one state per line with space-separated occupations.
    pub fn listing(&self) -> String {
        let mut out = String::with_capacity(self.occupations.len() * 2);
        for occ in self.iter() {
            // Writing into a String cannot fail.
            let _ = write_occupations(&mut out, occ);
            out.push('\n');
        }
        out
    }

    fn not_found(&self, state: &[u8]) -> Error {
        let mut s = String::new();
        let _ = write_occupations(&mut s, state);
        Error::StateNotFound(alloc::format!(
            "({s}) for N={}, M={}",
            self.n_particles,
            self.n_levels
        ))
    }
}

fn count_table(n_particles: usize, n_levels: usize) -> Vec<usize> {
    let stride = n_levels + 1;
    let mut counts = alloc::vec![0usize; (n_particles + 1) * stride];
    counts[0] = 1;
    for r in 0..=n_particles {
        for l in 1..=n_levels {
            let below = if r > 0 { counts[(r - 1) * stride + l] } else { 0 };
            counts[r * stride + l] = counts[r * stride + l - 1] + below;
        }
    }
    counts
}
