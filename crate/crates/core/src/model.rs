//! Model parameters and disorder realizations.
//!
//! The interaction is
//!
//! ```text
//! H_I = Σ_{A, B} V_{AB} a†_{s1} a†_{s2} a_{s3} a_{s4},   A = (s1 ≤ s2), B = (s3 ≤ s4)
//! ```
//!
//! where the sum runs once over every ordered pair of unordered level pairs,
//! so each distinct operator appears exactly once. `V_{AB} = V_{BA}` makes
//! `H_I` real symmetric; each class `{A, B}` gets one independent Gaussian of
//! variance `V²`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::seed::{self, SP_STREAM, TWO_BODY_STREAM};
use crate::{Error, Result};

/// How single-particle energies are chosen. Both have mean spacing `d = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SpMode {
    /// `M` independent uniform draws on `[0, M]`, sorted ascending.
    UniformRandom,
    /// `ε_s = s` for `s = 0, ..., M-1`.
    PicketFence,
}

impl core::str::FromStr for SpMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-random" | "uniform" | "random" => Ok(SpMode::UniformRandom),
            "picket-fence" | "picket" => Ok(SpMode::PicketFence),
            other => Err(Error::InvalidParameter(alloc::format!(
                "unknown single-particle mode {other:?} (expected uniform-random or picket-fence)"
            ))),
        }
    }
}

impl core::fmt::Display for SpMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            SpMode::UniformRandom => "uniform-random",
            SpMode::PicketFence => "picket-fence",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub n_particles: usize,
    pub n_levels: usize,
    /// Standard deviation `V` of the two-body coefficients, in units of `d`.
    pub interaction_strength: f64,
    pub sp_mode: SpMode,
}

impl ModelParams {
    pub fn new(n_particles: usize, n_levels: usize, interaction_strength: f64, sp_mode: SpMode) -> Self {
        ModelParams {
            n_particles,
            n_levels,
            interaction_strength,
            sp_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 1 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if self.n_levels < 2 {
            return Err(Error::InvalidParameter(alloc::format!(
                "M must be at least 2, got {}",
                self.n_levels
            )));
        }
        if self.n_levels > u8::MAX as usize {
            return Err(Error::InvalidParameter(alloc::format!(
                "M must be at most 255, got {}",
                self.n_levels
            )));
        }
        let v = self.interaction_strength;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "V must be finite and non-negative, got {v}"
            )));
        }
        Ok(())
    }

    /// Draw a realization with both substreams keyed on `seed`.
    pub fn draw(&self, seed: u64) -> Result<TbriModel> {
        self.draw_with_seeds(seed, seed)
    }

    /// Draw a realization with independent seeds for the single-particle
    /// energies and for the two-body coefficients. Keeping `sp_seed` fixed
    /// while varying `two_body_seed` redraws only the interaction.
    pub fn draw_with_seeds(&self, sp_seed: u64, two_body_seed: u64) -> Result<TbriModel> {
        self.validate()?;
        let m = self.n_levels;
        let sp_energies = match self.sp_mode {
            SpMode::PicketFence => (0..m).map(|s| s as f64).collect(),
            SpMode::UniformRandom => {
                let mut rng = seed::stream(sp_seed, SP_STREAM);
                let mut e: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * m as f64).collect();
                e.sort_by(f64::total_cmp);
                e
            }
        };
        let mut rng = seed::stream(two_body_seed, TWO_BODY_STREAM);
        let two_body = TwoBodyTable::draw(m, self.interaction_strength, &mut rng);
        Ok(TbriModel {
            params: *self,
            sp_energies,
            two_body,
            sp_seed,
            rng_seed: two_body_seed,
        })
    }
}

/// Index of unordered level pairs `(a ≤ b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndex {
    n_levels: usize,
    pairs: Vec<(u8, u8)>,
}

impl PairIndex {
    pub fn new(n_levels: usize) -> Self {
        let mut pairs = Vec::with_capacity(n_levels * (n_levels + 1) / 2);
        for a in 0..n_levels {
            for b in a..n_levels {
                pairs.push((a as u8, b as u8));
            }
        }
        PairIndex { n_levels, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.pairs
    }

    /// Index of the pair `{a, b}` in either order.
    pub fn index(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        a * (2 * self.n_levels - a + 1) / 2 + (b - a)
    }
}

/// Symmetric table `V_{AB}` over unordered level pairs, packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoBodyTable {
    n_pairs: usize,
    values: Vec<f64>,
}

impl TwoBodyTable {
    fn draw<R: Rng>(n_levels: usize, strength: f64, rng: &mut R) -> Self {
        let n_pairs = n_levels * (n_levels + 1) / 2;
        let values = (0..n_pairs * (n_pairs + 1) / 2)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                strength * z
            })
            .collect();
        TwoBodyTable { n_pairs, values }
    }

    pub fn zeros(n_levels: usize) -> Self {
        let n_pairs = n_levels * (n_levels + 1) / 2;
        TwoBodyTable {
            n_pairs,
            values: alloc::vec![0.0; n_pairs * (n_pairs + 1) / 2],
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    /// `V_{AB}` for pair indices `a`, `b` (see [`PairIndex`]).
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.values[a * (2 * self.n_pairs - a + 1) / 2 + (b - a)]
    }

    /// Independent coefficients in draw order.
    pub fn independent_values(&self) -> &[f64] {
        &self.values
    }
}

/// `Σ_s ε_s n_s`.
pub fn unperturbed_energy(sp_energies: &[f64], occupations: &[u8]) -> f64 {
    sp_energies.iter().zip(occupations).map(|(e, &n)| e * n as f64).sum()
}

/// A disorder realization: parameters plus the drawn energies and couplings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TbriModel {
    pub params: ModelParams,
    /// `ε_s`, ascending.
    pub sp_energies: Vec<f64>,
    pub two_body: TwoBodyTable,
    pub sp_seed: u64,
    /// Seed of the two-body stream.
    pub rng_seed: u64,
}

impl TbriModel {
    pub fn n_particles(&self) -> usize {
        self.params.n_particles
    }

    pub fn n_levels(&self) -> usize {
        self.params.n_levels
    }

    pub fn interaction_strength(&self) -> f64 {
        self.params.interaction_strength
    }

    /// Unperturbed energy `Σ_s ε_s n_s` of an occupation vector.
    pub fn unperturbed_energy(&self, occupations: &[u8]) -> f64 {
        unperturbed_energy(&self.sp_energies, occupations)
    }

    /// Mean single-particle energy `ε̄`.
    pub fn mean_sp_energy(&self) -> f64 {
        self.sp_energies.iter().sum::<f64>() / self.sp_energies.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picket_fence_levels() {
        let m = ModelParams::new(2, 5, 0.1, SpMode::PicketFence).draw(3).unwrap();
        assert_eq!(m.sp_energies, alloc::vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn uniform_levels_are_sorted_in_range() {
        let m = ModelParams::new(3, 11, 0.1, SpMode::UniformRandom).draw(9).unwrap();
        assert!(m.sp_energies.windows(2).all(|w| w[0] <= w[1]));
        assert!(m.sp_energies.iter().all(|&e| (0.0..=11.0).contains(&e)));
    }

    #[test]
    fn zero_strength_gives_zero_couplings() {
        let m = ModelParams::new(3, 6, 0.0, SpMode::UniformRandom).draw(1).unwrap();
        assert!(m.two_body.independent_values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_same_model() {
        let p = ModelParams::new(4, 7, 0.3, SpMode::UniformRandom);
        assert_eq!(p.draw(42).unwrap(), p.draw(42).unwrap());
        assert_ne!(p.draw(42).unwrap(), p.draw(43).unwrap());
    }

    #[test]
    fn fixed_sp_seed_keeps_levels() {
        let p = ModelParams::new(4, 7, 0.3, SpMode::UniformRandom);
        let a = p.draw_with_seeds(1, 10).unwrap();
        let b = p.draw_with_seeds(1, 11).unwrap();
        assert_eq!(a.sp_energies, b.sp_energies);
        assert_ne!(a.two_body, b.two_body);
    }

    #[test]
    fn coupling_standard_deviation() {
        // M = 11: 66 pairs, 2211 independent coefficients.
        let v = 0.4;
        let m = ModelParams::new(2, 11, v, SpMode::UniformRandom).draw(5).unwrap();
        let x = m.two_body.independent_values();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // Standard error of the sample std is about v / sqrt(2n) ≈ 0.006.
        assert!((var.sqrt() - v).abs() < 0.03, "std = {}", var.sqrt());
        assert!(mean.abs() < 0.04);
    }

    #[test]
    fn coupling_table_is_symmetric() {
        let m = ModelParams::new(2, 4, 1.0, SpMode::PicketFence).draw(2).unwrap();
        let p = m.two_body.n_pairs();
        for a in 0..p {
            for b in 0..p {
                assert_eq!(m.two_body.get(a, b), m.two_body.get(b, a));
            }
        }
    }

    #[test]
    fn pair_index_is_dense() {
        let idx = PairIndex::new(5);
        for (i, &(a, b)) in idx.pairs().iter().enumerate() {
            assert_eq!(idx.index(a as usize, b as usize), i);
            assert_eq!(idx.index(b as usize, a as usize), i);
        }
    }

    #[test]
    fn validation() {
        assert!(ModelParams::new(2, 1, 0.1, SpMode::PicketFence).draw(0).is_err());
        assert!(ModelParams::new(0, 3, 0.1, SpMode::PicketFence).draw(0).is_err());
        assert!(ModelParams::new(2, 3, -0.1, SpMode::PicketFence).draw(0).is_err());
        assert!(ModelParams::new(2, 3, f64::NAN, SpMode::PicketFence).draw(0).is_err());
        assert!("picket-fence".parse::<SpMode>().is_ok());
        assert!("bogus".parse::<SpMode>().is_err());
    }
}
