//! Sparse assembly of `H = H_0 + H_I` in the Fock basis.
//!
//! Matrix elements come from applying `a†_{s1} a†_{s2} a_{s3} a_{s4}` to
//! occupation vectors with the usual `√n` factors. Only the upper triangle is
//! stored. An off-diagonal entry is kept whenever the bosonic amplitude is
//! non-zero, even if the random coefficient happens to vanish, so the stored
//! pattern is the structural coupling graph and does not depend on the seed.

use alloc::vec::Vec;

// Float supplies libm-backed math when nothing links std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::FockBasis;
use crate::model::{PairIndex, TbriModel};
use crate::{Error, Result};

/// Which parts of the Hamiltonian to put on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parts {
    /// `H_0 + H_I`.
    Full,
    /// `H_I` only, the infinite-interaction reference. `h0_diagonal` still
    /// holds the unperturbed energies.
    InteractionOnly,
}

/// One stored upper-triangle element, `row < col`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffDiagonal {
    pub row: u32,
    pub col: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    diagonal: Vec<f64>,
    h0_diagonal: Vec<f64>,
    /// Sorted by `(row, col)`.
    off_diagonal: Vec<OffDiagonal>,
}

impl SparseHamiltonian {
    /// Build from raw parts. Entries are sorted and must satisfy `row < col < dimension`.
    pub fn from_parts(
        diagonal: Vec<f64>,
        h0_diagonal: Vec<f64>,
        mut off_diagonal: Vec<OffDiagonal>,
    ) -> Result<Self> {
        let dim = diagonal.len();
        if h0_diagonal.len() != dim {
            return Err(Error::InvalidParameter(alloc::format!(
                "diagonal has {dim} entries but h0 diagonal has {}",
                h0_diagonal.len()
            )));
        }
        if let Some(bad) = off_diagonal
            .iter()
            .find(|e| e.row >= e.col || e.col as usize >= dim)
        {
            return Err(Error::InvalidParameter(alloc::format!(
                "off-diagonal entry ({}, {}) is not strictly upper triangular in dimension {dim}",
                bad.row,
                bad.col
            )));
        }
        off_diagonal.sort_by_key(|e| (e.row, e.col));
        if off_diagonal
            .windows(2)
            .any(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
        {
            return Err(Error::InvalidParameter("duplicate off-diagonal entry".into()));
        }
        Ok(SparseHamiltonian {
            diagonal,
            h0_diagonal,
            off_diagonal,
        })
    }

    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    /// `H_kk`.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Unperturbed energies `E⁰_k`.
    pub fn h0_diagonal(&self) -> &[f64] {
        &self.h0_diagonal
    }

    pub fn off_diagonal(&self) -> &[OffDiagonal] {
        &self.off_diagonal
    }

    /// Number of structural off-diagonal couplings in each row.
    pub fn row_connectivity(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.dimension()];
        for e in &self.off_diagonal {
            counts[e.row as usize] += 1;
            counts[e.col as usize] += 1;
        }
        counts
    }

    /// `Σ_{j≠k} H_kj²` for every row.
    pub fn off_diagonal_row_norms_sq(&self) -> Vec<f64> {
        let mut acc = alloc::vec![0.0; self.dimension()];
        for e in &self.off_diagonal {
            let v2 = e.value * e.value;
            acc[e.row as usize] += v2;
            acc[e.col as usize] += v2;
        }
        acc
    }

    /// Symmetric adjacency of the structural coupling graph as
    /// `(offsets, neighbours)` in CSR layout; neighbours of each row are sorted.
    pub fn adjacency(&self) -> (Vec<usize>, Vec<u32>) {
        let counts = self.row_connectivity();
        let mut offsets = Vec::with_capacity(counts.len() + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut fill = offsets[..counts.len()].to_vec();
        let mut neighbours = alloc::vec![0u32; offsets[counts.len()]];
        for e in &self.off_diagonal {
            neighbours[fill[e.row as usize]] = e.col;
            fill[e.row as usize] += 1;
            neighbours[fill[e.col as usize]] = e.row;
            fill[e.col as usize] += 1;
        }
        for k in 0..counts.len() {
            neighbours[offsets[k]..offsets[k + 1]].sort_unstable();
        }
        (offsets, neighbours)
    }

    /// Frobenius norm of the full symmetric matrix.
    pub fn frobenius_norm(&self) -> f64 {
        let d: f64 = self.diagonal.iter().map(|x| x * x).sum();
        let o: f64 = self.off_diagonal.iter().map(|e| e.value * e.value).sum();
        (d + 2.0 * o).sqrt()
    }

    /// Dense column-major copy, `dimension × dimension`.
    pub fn to_dense(&self) -> faer::Mat<f64> {
        let n = self.dimension();
        let mut m = faer::Mat::<f64>::zeros(n, n);
        for (k, &d) in self.diagonal.iter().enumerate() {
            m[(k, k)] = d;
        }
        for e in &self.off_diagonal {
            let (r, c) = (e.row as usize, e.col as usize);
            m[(r, c)] = e.value;
            m[(c, r)] = e.value;
        }
        m
    }
}

/// Assemble `H_0 + H_I` for `model` in `basis`.
pub fn assemble(model: &TbriModel, basis: &FockBasis) -> Result<SparseHamiltonian> {
    assemble_parts(model, basis, Parts::Full)
}

pub fn assemble_parts(model: &TbriModel, basis: &FockBasis, parts: Parts) -> Result<SparseHamiltonian> {
    if model.n_particles() != basis.n_particles() || model.n_levels() != basis.n_levels() {
        return Err(Error::BasisMismatch {
            model_n: model.n_particles(),
            model_m: model.n_levels(),
            basis_n: basis.n_particles(),
            basis_m: basis.n_levels(),
        });
    }
    let dim = basis.len();
    if dim > u32::MAX as usize {
        return Err(Error::BasisTooLarge {
            n_particles: basis.n_particles(),
            n_levels: basis.n_levels(),
        });
    }
    let m = basis.n_levels();
    let pairs = PairIndex::new(m);
    let table = &model.two_body;

    let h0_diagonal: Vec<f64> = basis.iter().map(|s| model.unperturbed_energy(s)).collect();
    let mut diagonal = match parts {
        Parts::Full => h0_diagonal.clone(),
        Parts::InteractionOnly => alloc::vec![0.0; dim],
    };
    let mut off_diagonal = Vec::new();

    // Scratch row: accumulated value and a touched flag per column.
    let mut row_values = alloc::vec![0.0f64; dim];
    let mut touched_flag = alloc::vec![false; dim];
    let mut touched: Vec<usize> = Vec::new();
    let mut work = alloc::vec![0u8; m];

    for k in 0..dim {
        let state = basis.state(k);
        for (b_idx, &(s3, s4)) in pairs.pairs().iter().enumerate() {
            let (s3, s4) = (s3 as usize, s4 as usize);
            let amp_a = annihilation_amplitude(state, s3, s4);
            if amp_a == 0.0 {
                continue;
            }
            work.copy_from_slice(state);
            work[s3] -= 1;
            work[s4] -= 1;
            for (a_idx, &(s1, s2)) in pairs.pairs().iter().enumerate() {
                let (s1, s2) = (s1 as usize, s2 as usize);
                let amp = amp_a * creation_amplitude(&work, s1, s2);
                work[s1] += 1;
                work[s2] += 1;
                let j = basis.rank_unchecked(&work);
                work[s1] -= 1;
                work[s2] -= 1;
                if j < k {
                    continue;
                }
                let value = table.get(a_idx, b_idx) * amp;
                if j == k {
                    diagonal[k] += value;
                } else {
                    if !touched_flag[j] {
                        touched_flag[j] = true;
                        touched.push(j);
                    }
                    row_values[j] += value;
                }
            }
        }
        touched.sort_unstable();
        for &j in &touched {
            off_diagonal.push(OffDiagonal {
                row: k as u32,
                col: j as u32,
                value: row_values[j],
            });
            row_values[j] = 0.0;
            touched_flag[j] = false;
        }
        touched.clear();
    }

    Ok(SparseHamiltonian {
        diagonal,
        h0_diagonal,
        off_diagonal,
    })
}

/// Amplitude of `a_{s3} a_{s4}` acting on `state` (`s3 ≤ s4`).
#[inline]
fn annihilation_amplitude(state: &[u8], s3: usize, s4: usize) -> f64 {
    let n3 = state[s3] as f64;
    if s3 == s4 {
        (n3 * (n3 - 1.0)).max(0.0).sqrt()
    } else {
        (n3 * state[s4] as f64).sqrt()
    }
}

/// Amplitude of `a†_{s1} a†_{s2}` acting on `state` (`s1 ≤ s2`).
#[inline]
fn creation_amplitude(state: &[u8], s1: usize, s2: usize) -> f64 {
    let n1 = state[s1] as f64;
    if s1 == s2 {
        ((n1 + 1.0) * (n1 + 2.0)).sqrt()
    } else {
        ((n1 + 1.0) * (state[s2] as f64 + 1.0)).sqrt()
    }
}

/// Closed-form bounds on the number of structurally coupled states per row,
/// `(M_min, M_max)`.
///
/// `M_min = (M-1)(M+2)/2` is attained by `|0..N..0⟩` and
/// `M_max = N(M-1)[1 + (N-1)(M-2)/4]` by states with single or null
/// occupations, which exist only when `M > N`; for `M ≤ N` the second value
/// is still an upper bound but no row reaches it. A single particle is never
/// coupled by a two-body operator, so `N = 1` gives `(0, 0)`.
pub fn connectivity_bounds(n_particles: usize, n_levels: usize) -> (usize, usize) {
    if n_particles < 2 || n_levels < 2 {
        return (0, 0);
    }
    let (n, m) = (n_particles, n_levels);
    let min = (m - 1) * (m + 2) / 2;
    let max = n * (m - 1) + n * (n - 1) * (m - 1) * (m - 2) / 4;
    (min, max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, SpMode};
    use alloc::vec;

    fn model(n: usize, m: usize, v: f64, seed: u64) -> (FockBasis, TbriModel) {
        let b = FockBasis::enumerate(n, m).unwrap();
        let mm = ModelParams::new(n, m, v, SpMode::UniformRandom).draw(seed).unwrap();
        (b, mm)
    }

    #[test]
    fn zero_interaction_is_diagonal_h0() {
        let (b, m) = model(3, 5, 0.0, 4);
        let h = assemble(&m, &b).unwrap();
        assert_eq!(h.diagonal(), h.h0_diagonal());
        assert!(h.off_diagonal().iter().all(|e| e.value == 0.0));
        for (k, s) in b.iter().enumerate() {
            assert_eq!(h.h0_diagonal()[k], m.unperturbed_energy(s));
        }
    }

    #[test]
    fn single_particle_has_no_interaction() {
        let (b, m) = model(1, 6, 0.7, 2);
        let h = assemble(&m, &b).unwrap();
        assert!(h.off_diagonal().is_empty());
        assert_eq!(h.diagonal(), h.h0_diagonal());
        assert_eq!(connectivity_bounds(1, 6), (0, 0));
    }

    #[test]
    fn two_bosons_on_two_levels_fully_coupled() {
        let (b, m) = model(2, 2, 0.5, 8);
        let h = assemble(&m, &b).unwrap();
        assert_eq!(h.row_connectivity(), vec![2, 2, 2]);
    }

    #[test]
    fn basis_mismatch() {
        let b = FockBasis::enumerate(3, 5).unwrap();
        let m = ModelParams::new(2, 5, 0.1, SpMode::PicketFence).draw(0).unwrap();
        assert!(matches!(assemble(&m, &b), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn bounds_formula() {
        assert_eq!(connectivity_bounds(6, 11), (65, 735));
        assert_eq!(connectivity_bounds(2, 3).0, 5);
    }

    #[test]
    fn couplings_move_at_most_two_particles() {
        let (b, m) = model(4, 6, 0.3, 11);
        let h = assemble(&m, &b).unwrap();
        for e in h.off_diagonal() {
            let (x, y) = (b.state(e.row as usize), b.state(e.col as usize));
            let up: i32 = x.iter().zip(y).map(|(&a, &c)| (a as i32 - c as i32).max(0)).sum();
            let down: i32 = x.iter().zip(y).map(|(&a, &c)| (c as i32 - a as i32).max(0)).sum();
            assert_eq!(up, down);
            assert!((1..=2).contains(&up));
        }
    }

    #[test]
    fn interaction_only_drops_h0() {
        let (b, m) = model(3, 5, 0.3, 6);
        let full = assemble(&m, &b).unwrap();
        let hi = assemble_parts(&m, &b, Parts::InteractionOnly).unwrap();
        for k in 0..b.len() {
            let expect = full.diagonal()[k] - full.h0_diagonal()[k];
            assert!((hi.diagonal()[k] - expect).abs() < 1e-12);
        }
        assert_eq!(full.off_diagonal(), hi.off_diagonal());
    }

    #[test]
    fn from_parts_validates() {
        let bad = vec![OffDiagonal { row: 1, col: 1, value: 0.0 }];
        assert!(SparseHamiltonian::from_parts(vec![0.0; 2], vec![0.0; 2], bad).is_err());
        let ok = vec![OffDiagonal { row: 0, col: 1, value: 2.0 }];
        let h = SparseHamiltonian::from_parts(vec![0.0; 2], vec![0.0; 2], ok).unwrap();
        assert_eq!(h.to_dense()[(1, 0)], 2.0);
    }
}
