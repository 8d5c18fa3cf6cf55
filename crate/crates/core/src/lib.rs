//! Two-body random interaction (TBRI) model of `N` bosons on `M` single-particle
//! levels.
//!
//! The crate covers the whole numerical pipeline without touching the file
//! system: Fock-basis enumeration ([`basis`]), disorder realization and sparse
//! Hamiltonian assembly ([`model`], [`hamiltonian`]), dense exact
//! diagonalization ([`spectral`]), strength functions and line-shape fits
//! ([`strength`]), eigenstate localization measures ([`eigenstate`]) and the
//! Bose-Einstein thermalization analysis ([`thermal`]).
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use tbri_core::{basis::FockBasis, model::{ModelParams, SpMode}, hamiltonian, spectral};
//!
//! let basis = FockBasis::enumerate(3, 4).unwrap();
//! let params = ModelParams::new(3, 4, 0.2, SpMode::UniformRandom);
//! let model = params.draw(7).unwrap();
//! let h = hamiltonian::assemble(&model, &basis).unwrap();
//! let spec = spectral::diagonalize(&h).unwrap();
//! assert_eq!(spec.eigenvalues().len(), basis.len());
//! ```
#![no_std]

extern crate alloc;

pub mod basis;
pub mod eigenstate;
mod error;
pub mod fit;
pub mod hamiltonian;
pub mod model;
pub mod seed;
pub mod spectral;
pub mod stats;
pub mod strength;
pub mod thermal;

pub use error::{Error, Result};
