//! Dense Hermitian linear algebra: the substrate every matrix function,
//! entropy and derivative in this crate is built on.
//!
//! Matrices are stored as `nalgebra::DMatrix<Complex64>`. A [`HermitianMatrix`]
//! is a checked wrapper; the check is relative to the largest entry so the
//! same tolerance works for tiny and huge matrices alike.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phi::ScalarFunction;

/// General dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Relative slack used for Hermiticity, unitarity and reconstruction checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Tolerance `1e-10 * (1 + max |entry|)` for structural invariants.
pub fn structure_tolerance(m: &CMatrix) -> f64 {
    STRUCTURE_TOL * (1.0 + max_abs_entry(m))
}

/// A dense self-adjoint matrix.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.inner)
    }
}

impl HermitianMatrix {
    /// Validates `m` and stores its exact Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidParameter(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let tol = structure_tolerance(&m);
        let d = m.nrows();
        for i in 0..d {
            for j in i..d {
                let a = m[(i, j)];
                let b = m[(j, i)].conj();
                if (a - b).norm() > tol {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        value: format!("{a}"),
                        mirror: format!("{b}"),
                        tolerance: tol,
                    });
                }
            }
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    /// Projects onto the Hermitian part `(M + M†)/2` without validation.
    ///
    /// Used internally for results that are Hermitian in exact arithmetic.
    pub fn from_matrix_unchecked(m: CMatrix) -> Self {
        let adj = m.adjoint();
        let mut inner = (m + adj) * c(0.5);
        for i in 0..inner.nrows() {
            inner[(i, i)].im = 0.0;
        }
        Self { inner }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter("rows must form a square matrix".into()));
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| c(rows[i][j])))
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        Self {
            inner: CMatrix::from_fn(d, d, |i, j| if i == j { c(values[i]) } else { c(0.0) }),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            inner: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            inner: CMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: &self.inner * c(s),
        }
    }

    /// `self * other` as a general matrix (not Hermitian unless they commute).
    pub fn matmul(&self, other: &HermitianMatrix) -> CMatrix {
        &self.inner * &other.inner
    }

    /// `self²`, which is Hermitian.
    pub fn square(&self) -> Self {
        Self::from_matrix_unchecked(&self.inner * &self.inner)
    }

    /// Anticommutator `XY + YX`.
    pub fn anticommutator(&self, other: &HermitianMatrix) -> Self {
        let xy = &self.inner * &other.inner;
        let yx = &other.inner * &self.inner;
        Self::from_matrix_unchecked(xy + yx)
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs_entry(&self.inner)
    }

    /// Largest singular value (spectral norm).
    pub fn spectral_norm(&self) -> f64 {
        eigenvalues(self)
            .iter()
            .fold(0.0_f64, |acc, l| acc.max(l.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigenvalues(self)[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *eigenvalues(self).last().expect("dim >= 1")
    }

    pub fn check_dim(&self, other: &HermitianMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Unitary conjugation `U A U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::from_matrix_unchecked(u * &self.inner * u.adjoint())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix { inner: -&self.inner }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

/// `Σ wᵢ Aᵢ` over a non-empty list.
pub fn weighted_sum<'a, I>(terms: I) -> HermitianMatrix
where
    I: IntoIterator<Item = (f64, &'a HermitianMatrix)>,
{
    let mut acc: Option<CMatrix> = None;
    for (w, m) in terms {
        let term = m.as_matrix() * c(w);
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    HermitianMatrix {
        inner: acc.expect("weighted_sum of an empty list"),
    }
}

/// Eigenvalues ascending with the matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(g(λ)) U†`.
    pub fn recompose_with<F: Fn(f64) -> f64>(&self, g: F) -> HermitianMatrix {
        let u = &self.eigenvectors;
        let d = self.dim();
        let mut scaled = u.clone();
        for j in 0..d {
            let s = g(self.eigenvalues[j]);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        HermitianMatrix::from_matrix_unchecked(scaled * u.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.recompose_with(|l| l)
    }

    /// `U† X U`: coordinates of `X` in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * x * &self.eigenvectors
    }

    /// `U Y U†`.
    pub fn from_eigenbasis(&self, y: &CMatrix) -> CMatrix {
        &self.eigenvectors * y * self.eigenvectors.adjoint()
    }

    pub fn spectral_diameter(&self) -> f64 {
        self.eigenvalues.last().unwrap() - self.eigenvalues[0]
    }
}

pub fn spectral_decompose(a: &HermitianMatrix) -> SpectralDecomposition {
    let d = a.dim();
    if d == 1 {
        return SpectralDecomposition {
            eigenvalues: vec![a.inner[(0, 0)].re],
            eigenvectors: CMatrix::identity(1, 1),
        };
    }
    let eig = a.inner.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(d, d, |r, k| eig.eigenvectors[(r, order[k])]);
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Validating variant: the input must pass the Hermitian check.
pub fn spectral_decompose_checked(m: &CMatrix) -> Result<SpectralDecomposition> {
    let h = HermitianMatrix::new(m.clone())?;
    Ok(spectral_decompose(&h))
}

pub fn eigenvalues(a: &HermitianMatrix) -> Vec<f64> {
    spectral_decompose(a).eigenvalues
}

/// Standard matrix function `U f(Λ) U†`.
pub fn apply_scalar_function(f: &ScalarFunction, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let sd = spectral_decompose(a);
    apply_to_decomposition(f, &sd)
}

pub fn apply_to_decomposition(
    f: &ScalarFunction,
    sd: &SpectralDecomposition,
) -> Result<HermitianMatrix> {
    for &l in &sd.eigenvalues {
        f.check_value_domain(l)?;
    }
    Ok(sd.recompose_with(|l| f.value(l)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerVerdict {
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_vector: Option<Vec<Complex64>>,
}

/// Default slack `1e-8 (‖A‖₂ + ‖B‖₂)`.
pub fn default_loewner_tolerance(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    1e-8 * (a.spectral_norm() + b.spectral_norm())
}

/// Decides `A ⪰ B` from the smallest eigenvalue of `A − B`.
pub fn loewner_compare(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<LoewnerVerdict> {
    a.check_dim(b)?;
    Ok(psd_verdict(&(a - b), tol))
}

/// Verdict on `M ⪰ 0`; failing verdicts carry the minimizing eigenvector.
pub fn psd_verdict(m: &HermitianMatrix, tol: f64) -> LoewnerVerdict {
    let sd = spectral_decompose(m);
    let min_eigenvalue = sd.eigenvalues[0];
    let holds = min_eigenvalue >= -tol;
    let witness_vector = if holds {
        None
    } else {
        Some(sd.eigenvectors.column(0).iter().copied().collect())
    };
    LoewnerVerdict {
        min_eigenvalue,
        tolerance: tol,
        holds,
        witness_vector,
    }
}

pub fn trace(a: &HermitianMatrix) -> f64 {
    a.inner.trace().re
}

pub fn normalized_trace(a: &HermitianMatrix) -> f64 {
    trace(a) / a.dim() as f64
}

/// Hilbert-Schmidt inner product `Tr A†B`.
pub fn hs_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Complex64 {
    hs_inner_general(&a.inner, &b.inner)
}

pub fn hs_inner_general(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Schatten p-norm `(Σ|λᵢ|^p)^{1/p}`, `p ≥ 1`.
pub fn schatten_norm(a: &HermitianMatrix, p: f64) -> Result<f64> {
    Ok(schatten_norm_pow(a, p)?.powf(1.0 / p))
}

/// `‖A‖_p^p`, avoiding the final root.
pub fn schatten_norm_pow(a: &HermitianMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("Schatten exponent must be >= 1, got {p}")));
    }
    Ok(eigenvalues(a).iter().map(|l| l.abs().powf(p)).sum())
}

pub fn is_unitary(u: &CMatrix) -> bool {
    let d = u.nrows();
    let prod = u.adjoint() * u;
    (prod - CMatrix::identity(d, d)).iter().all(|z| z.norm() <= STRUCTURE_TOL * (1.0 + max_abs_entry(u)))
}

/// JSON layout `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major; `im`
/// may be omitted for real matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let d = m.nrows();
        let re = (0..d).map(|i| (0..d).map(|j| m[(i, j)].re).collect()).collect();
        let is_real = m.iter().all(|z| z.im == 0.0);
        let im = if is_real {
            None
        } else {
            Some((0..d).map(|i| (0..d).map(|j| m[(i, j)].im).collect()).collect())
        };
        Self { dim: d, re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if d == 0 || !shape_ok(&self.re) || self.im.as_ref().is_some_and(|im| !shape_ok(im)) {
            return Err(Error::Json(format!("matrix rows do not match dim {d}")));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.re[i][j], im)
        }))
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.inner).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let m = raw.to_matrix().map_err(serde::de::Error::custom)?;
        HermitianMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
