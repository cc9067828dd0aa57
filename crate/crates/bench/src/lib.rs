//! Seeded inputs shared by the benchmarks.

use phi_lab_core::sampling::{sample_direction, sample_ensemble, sample_product, sample_spectrum_in, trial_rng};
use phi_lab_core::{HermitianMatrix, MatrixEnsemble, ProductEnsemble};

pub const SPECTRUM: (f64, f64) = (0.5, 4.0);

/// `(A, X)` with the spectrum of `A` in [`SPECTRUM`] and `‖X‖₂ = 1`.
pub fn point(d: usize, seed: u64) -> (HermitianMatrix, HermitianMatrix) {
    let mut rng = trial_rng(seed, "bench/point", d as u64);
    let a = sample_spectrum_in(&mut rng, d, SPECTRUM.0, SPECTRUM.1);
    (a, sample_direction(&mut rng, d))
}

pub fn ensemble(d: usize, atoms: usize, seed: u64) -> MatrixEnsemble {
    let mut rng = trial_rng(seed, "bench/ensemble", d as u64);
    sample_ensemble(&mut rng, d, atoms, SPECTRUM.0, SPECTRUM.1).expect("valid ensemble")
}

pub fn product(d: usize, sizes: &[usize], seed: u64) -> ProductEnsemble {
    let mut rng = trial_rng(seed, "bench/product", d as u64);
    sample_product(&mut rng, d, sizes, SPECTRUM.0, SPECTRUM.1).expect("valid product")
}
