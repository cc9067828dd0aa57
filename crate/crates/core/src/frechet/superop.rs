use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, HermitianMatrix, MatrixJson};
use crate::phi::ScalarFunction;

use super::DerivativeEngine;

/// Largest condition number accepted by [`superop_inverse`].
pub const CONDITION_LIMIT: f64 = 1e12;

/// Column stacking: `vec(X)` lists column 0, then column 1, ...
pub fn stack(x: &CMatrix) -> CMatrix {
    let (r, k) = x.shape();
    CMatrix::from_iterator(r * k, 1, x.iter().copied())
}

pub fn unstack(v: &CMatrix, d: usize) -> Result<CMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            got: v.len(),
        });
    }
    Ok(CMatrix::from_iterator(d, d, v.iter().copied()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Linear map on `d×d` matrices as a `d²×d²` matrix acting on column stacks.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperatorMatrix {
    pub dim: usize,
    pub entries: CMatrix,
}

impl SuperOperatorMatrix {
    pub fn new(dim: usize, entries: CMatrix) -> Result<Self> {
        if entries.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.nrows(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    /// Superoperator of `X ↦ B X C`, i.e. `Cᵀ ⊗ B`.
    pub fn sandwich(b: &CMatrix, cm: &CMatrix) -> Self {
        Self {
            dim: b.nrows(),
            entries: kron(&cm.transpose(), b),
        }
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.nrows(),
            });
        }
        unstack(&(&self.entries * stack(x)), self.dim)
    }

    /// Applies to a Hermitian argument and re-symmetrizes the result.
    pub fn apply_hermitian(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::from_matrix_unchecked(self.apply(x.as_matrix())?))
    }

    pub fn compose(&self, other: &SuperOperatorMatrix) -> SuperOperatorMatrix {
        SuperOperatorMatrix {
            dim: self.dim,
            entries: &self.entries * &other.entries,
        }
    }

    /// `⟨h, T h⟩` (real part) for Hermitian `h`.
    pub fn quadratic_form(&self, h: &HermitianMatrix) -> Result<f64> {
        let v = stack(h.as_matrix());
        let tv = &self.entries * &v;
        Ok((v.adjoint() * tv)[(0, 0)].re)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.entries.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Largest deviation from Hermitian-preservation, measured on the
    /// matrix-unit basis: `T(E_ij)† = T(E_ji)`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut eij = CMatrix::zeros(d, d);
                eij[(i, j)] = c(1.0);
                let mut eji = CMatrix::zeros(d, d);
                eji[(j, i)] = c(1.0);
                let a = self.apply(&eij).unwrap().adjoint();
                let b = self.apply(&eji).unwrap();
                worst = worst.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

impl Serialize for SuperOperatorMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.entries).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SuperOperatorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = MatrixJson::deserialize(d)?.to_matrix().map_err(serde::de::Error::custom)?;
        let n = m.nrows();
        let dim = (n as f64).sqrt().round() as usize;
        SuperOperatorMatrix::new(dim, m).map_err(serde::de::Error::custom)
    }
}

/// `T_A = Dψ[A]` as a superoperator: `(Ū ⊗ U) diag(vec G) (Uᵀ ⊗ U†)` with
/// `G_ij = ψ[λᵢ, λⱼ]`.
pub fn superop_matrix(psi: &ScalarFunction, a: &HermitianMatrix) -> Result<SuperOperatorMatrix> {
    let mut eng = DerivativeEngine::new(psi, a)?;
    let g = eng.first_divided_differences()?;
    let u = &eng.decomposition().eigenvectors;
    let d = a.dim();
    let left = kron(&u.map(|z| z.conj()), u);
    let right = kron(&u.transpose(), &u.adjoint());
    let gv = stack(&g);
    let mut scaled = right;
    for r in 0..d * d {
        let s = gv[r];
        for col in 0..d * d {
            scaled[(r, col)] *= s;
        }
    }
    Ok(SuperOperatorMatrix {
        dim: d,
        entries: left * scaled,
    })
}

/// Dense LU inverse, refused when the 2-norm condition number exceeds
/// [`CONDITION_LIMIT`].
pub fn superop_inverse(t: &SuperOperatorMatrix) -> Result<SuperOperatorMatrix> {
    let s = t.singular_values();
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::Singular {
            smallest_singular_value: smin,
            condition,
        });
    }
    let inv = t.entries.clone().lu().try_inverse().ok_or(Error::Singular {
        smallest_singular_value: smin,
        condition,
    })?;
    Ok(SuperOperatorMatrix {
        dim: t.dim,
        entries: inv,
    })
}
