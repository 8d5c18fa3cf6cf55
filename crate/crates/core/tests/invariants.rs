//! Property tests of identities that hold for every realization.

use proptest::prelude::*;
use tbri_core::basis::{basis_dimension, FockBasis};
use tbri_core::eigenstate;
use tbri_core::hamiltonian;
use tbri_core::model::{ModelParams, SpMode};
use tbri_core::spectral::{self, SpectralDecomposition};
use tbri_core::strength::{self, Binning, Shape};
use tbri_core::thermal;

fn mode(i: u8) -> SpMode {
    if i == 0 {
        SpMode::UniformRandom
    } else {
        SpMode::PicketFence
    }
}

fn solve(n: usize, m: usize, v: f64, sp: u8, seed: u64) -> (FockBasis, tbri_core::model::TbriModel, hamiltonian::SparseHamiltonian, SpectralDecomposition) {
    let basis = FockBasis::enumerate(n, m).unwrap();
    let model = ModelParams::new(n, m, v, mode(sp)).draw(seed).unwrap();
    let h = hamiltonian::assemble(&model, &basis).unwrap();
    let spec = spectral::diagonalize(&h).unwrap();
    (basis, model, h, spec)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moments_of_strength_functions(n in 1usize..4, m in 2usize..6, v in 0.0f64..2.0, sp in 0u8..2, seed in any::<u64>()) {
        let (_, _, h, spec) = solve(n, m, v, sp, seed);
        let eigs = spec.eigenvalues();
        let row_sq = h.off_diagonal_row_norms_sq();
        for k in 0..h.dimension() {
            let w = spec.basis_state_weights(k);
            let norm: f64 = w.iter().sum();
            let centroid: f64 = w.iter().zip(eigs).map(|(w, e)| w * e).sum();
            let var: f64 = w.iter().zip(eigs).map(|(w, e)| w * (e - h.diagonal()[k]).powi(2)).sum();
            prop_assert!(close(norm, 1.0, 1e-10));
            prop_assert!(close(centroid, h.diagonal()[k], 1e-9));
            prop_assert!(close(var, row_sq[k], 1e-9));
        }
        let trace: f64 = h.diagonal().iter().sum();
        prop_assert!(close(eigs.iter().sum(), trace, 1e-9));
        prop_assert!(eigs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn occupations_conserve_particles_and_energy(n in 1usize..4, m in 2usize..6, v in 0.0f64..2.0, sp in 0u8..2, seed in any::<u64>()) {
        let (basis, model, h, spec) = solve(n, m, v, sp, seed);
        for alpha in 0..spec.dimension() {
            let d = thermal::occupation_numbers(&spec, &basis, &model, alpha).unwrap();
            let total: f64 = d.values.iter().sum();
            let e: f64 = d.values.iter().zip(&model.sp_energies).map(|(n, e)| n * e).sum();
            let h0: f64 = spec.eigenvector(alpha).iter().zip(h.h0_diagonal()).map(|(c, e)| c * c * e).sum();
            prop_assert!(close(total, n as f64, 1e-9));
            prop_assert!(close(e, h0, 1e-9));
            prop_assert!(close(d.shift, d.dressed_energy - d.energy, 1e-12));
            prop_assert!(d.values.iter().all(|&x| x >= -1e-12 && x <= n as f64 + 1e-9));
        }
    }

    #[test]
    fn participation_ratio_bounds(n in 1usize..4, m in 2usize..6, v in 0.0f64..2.0, seed in any::<u64>()) {
        let (_, _, h, spec) = solve(n, m, v, 0, seed);
        for pr in eigenstate::participation_ratios(&spec).unwrap() {
            prop_assert!(pr >= 1.0 - 1e-9 && pr <= h.dimension() as f64 + 1e-9);
        }
    }

    #[test]
    fn same_seed_same_matrix(n in 1usize..4, m in 2usize..6, v in 0.01f64..2.0, seed in any::<u64>()) {
        let (_, _, a, _) = solve(n, m, v, 0, seed);
        let (_, _, b, _) = solve(n, m, v, 0, seed);
        prop_assert_eq!(a.diagonal(), b.diagonal());
        prop_assert_eq!(a.off_diagonal(), b.off_diagonal());
    }

    #[test]
    fn dimension_matches_enumeration(n in 1usize..6, m in 1usize..7) {
        let b = FockBasis::enumerate(n, m).unwrap();
        prop_assert_eq!(b.len(), basis_dimension(n, m).unwrap());
        for (i, s) in b.iter().enumerate() {
            prop_assert_eq!(s.iter().map(|&x| x as usize).sum::<usize>(), n);
            prop_assert_eq!(b.lookup(s).unwrap(), i);
        }
    }

    #[test]
    fn bed_round_trip(
        eps in proptest::collection::vec(0.0f64..10.0, 2..12),
        n in 1usize..8,
        f in 0.02f64..0.98,
    ) {
        let lo = n as f64 * eps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = n as f64 * eps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi - lo > 1e-3);
        let target = lo + f * (hi - lo);
        let s = thermal::solve_bed(&eps, n, target).unwrap();
        let np: f64 = s.predicted.iter().sum();
        let en: f64 = s.predicted.iter().zip(&eps).map(|(n, e)| n * e).sum();
        prop_assert!((np - n as f64).abs() <= 1e-9 * n as f64);
        prop_assert!((en - target).abs() <= 1e-9 * (hi - lo).max(target.abs()));
        let mean = n as f64 * eps.iter().sum::<f64>() / eps.len() as f64;
        if target > mean + 1e-9 * (hi - lo) {
            prop_assert!(s.beta < 0.0);
        } else if target < mean - 1e-9 * (hi - lo) {
            prop_assert!(s.beta > 0.0);
        }
    }

    #[test]
    fn unit_histogram_keeps_all_weight(
        pos in proptest::collection::vec(-3.0f64..3.0, 1..50),
        raw in proptest::collection::vec(0.0f64..1.0, 50),
    ) {
        let w: Vec<f64> = raw[..pos.len()].to_vec();
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-6);
        let binning = Binning::default();
        let hist = strength::unit_histogram(&pos, &w, 0.0, 1.0, &binning);
        prop_assert!(close(hist.total(), total, 1e-12));
        prop_assert!(hist.weights.iter().all(|&c| c >= 0.0));
        prop_assert_eq!(hist.weights.len(), binning.n_bins);
    }

    #[test]
    fn sorted_shapes_are_ordered(mut raw in proptest::collection::vec(0u8..3, 0..10)) {
        raw.sort_unstable();
        let shapes: Vec<Shape> = raw
            .iter()
            .map(|&i| [Shape::DeltaLike, Shape::BreitWigner, Shape::Gaussian][i as usize])
            .collect();
        prop_assert!(strength::shapes_are_ordered(&shapes));
        let mut rev = shapes.clone();
        rev.reverse();
        prop_assert_eq!(strength::shapes_are_ordered(&rev), shapes.first() == shapes.last());
    }
}
