//! Seeded random Hermitian matrices, unitaries and ensembles.
//!
//! Every trial draws from its own counter-based stream keyed by
//! `(seed, check name, trial index)`, so any single trial can be replayed
//! without re-running the ones before it, and parallel schedules give the
//! same numbers as serial ones.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::entropy::{MatrixEnsemble, ProductEnsemble};
use crate::error::Result;
use crate::linalg::{c, CMatrix, HermitianMatrix};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Independent stream for one trial of one check.
pub fn trial_rng(seed: u64, check: &str, trial: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(seed) ^ fnv1a(check));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(gaussian(rng) * s, gaussian(rng) * s)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng))
}

/// GUE-type Hermitian matrix: real Gaussian diagonal, complex Gaussian
/// off-diagonal, all scaled by `scale`.
pub fn sample_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> HermitianMatrix {
    let g = ginibre(rng, d);
    let h = (&g + g.adjoint()) * c(0.5 * scale);
    HermitianMatrix::from_matrix_unchecked(h)
}

/// Hermitian direction with unit spectral norm (zero only for `d = 0`).
pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianMatrix {
    let h = sample_hermitian(rng, d, 1.0);
    let n = h.spectral_norm();
    if n > 0.0 {
        h.scale(1.0 / n)
    } else {
        HermitianMatrix::identity(d)
    }
}

/// `G†G/d + floor·I` with complex Gaussian `G`.
pub fn sample_psd<R: Rng + ?Sized>(rng: &mut R, d: usize, floor: f64) -> HermitianMatrix {
    let g = ginibre(rng, d);
    let m = g.adjoint() * &g * c(1.0 / d as f64) + CMatrix::identity(d, d) * c(floor);
    HermitianMatrix::from_matrix_unchecked(m)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U diag(λ) U†` with Haar `U` and eigenvalues uniform in `[lo, hi]`.
pub fn sample_spectrum_in<R: Rng + ?Sized>(rng: &mut R, d: usize, lo: f64, hi: f64) -> HermitianMatrix {
    let u = haar_unitary(rng, d);
    let lambdas: Vec<f64> = (0..d).map(|_| rng.random_range(lo..=hi)).collect();
    HermitianMatrix::diag(&lambdas).conjugate_by(&u)
}

/// Probability vector with Dirichlet(1, …, 1) law.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn sample_ensemble<R: Rng + ?Sized>(rng: &mut R, d: usize, atoms: usize, lo: f64, hi: f64) -> Result<MatrixEnsemble> {
    let w = random_weights(rng, atoms);
    MatrixEnsemble::new(w.into_iter().map(|w| (w, sample_spectrum_in(rng, d, lo, hi))).collect())
}

/// Ensemble on the same sample space (same weights) as `like`.
pub fn sample_coupled<R: Rng + ?Sized>(rng: &mut R, like: &MatrixEnsemble, lo: f64, hi: f64) -> Result<MatrixEnsemble> {
    let d = like.dim();
    MatrixEnsemble::new(like.weights().iter().map(|&w| (w, sample_spectrum_in(rng, d, lo, hi))).collect())
}

pub fn sample_product<R: Rng + ?Sized>(rng: &mut R, d: usize, sizes: &[usize], lo: f64, hi: f64) -> Result<ProductEnsemble> {
    let factors: Vec<Vec<f64>> = sizes.iter().map(|&s| random_weights(rng, s)).collect();
    let total: usize = sizes.iter().product();
    let images = (0..total).map(|_| sample_spectrum_in(rng, d, lo, hi)).collect();
    ProductEnsemble::new(factors, images)
}
