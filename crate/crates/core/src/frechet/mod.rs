//! Fréchet derivatives of standard matrix functions.
//!
//! Orders one and two use the Daleckii–Krein representation: in the
//! eigenbasis of `A`, the derivative is an entrywise (order 1) or
//! contracted (order 2) product with divided differences of `f` at the
//! eigenvalues. Order three defaults to a central difference of the exact
//! order-two value; the pure divided-difference route is kept for
//! cross-checking small dimensions.

mod identities;
mod oracle;
mod superop;

pub use identities::{
    chain_rule_check, inversion_derivative_check, partial_derivative_check, trace_duality, BivariateMap,
    ConstantMap, GapMap, IdentityMap, MatrixMap, ProductMap, SpectralMap, SumMap, TraceDuality,
};
pub use oracle::{
    default_fd_step, finite_diff_oracle, finite_diff_oracle_richardson, oracle_agreement_check, oracle_agreement_sweep,
    ORACLE_REL_TOL,
};
pub use superop::{kron, stack, superop_inverse, superop_matrix, unstack, SuperOperatorMatrix, CONDITION_LIMIT};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{spectral_decompose, CMatrix, HermitianMatrix, SpectralDecomposition};
use crate::phi::{divided_differences, DividedDifferenceTable, ScalarFunction};

/// How the third derivative is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ThirdOrderMethod {
    /// Central difference of the exact second derivative, Richardson
    /// extrapolated over steps `h` and `h/2`.
    #[default]
    Hybrid,
    /// Third divided differences (O(d⁴) table).
    DividedDifference,
}

/// Relative step of the hybrid third-order rule: `h = 1e-5 (1 + ‖A‖₂)`.
pub const HYBRID_STEP_REL: f64 = 1e-5;

/// Spectral data of `A` plus lazily built divided-difference tables for `f`.
pub struct DerivativeEngine<'a> {
    f: &'a ScalarFunction,
    sd: SpectralDecomposition,
    first: Option<DividedDifferenceTable>,
    second: Option<DividedDifferenceTable>,
    third: Option<DividedDifferenceTable>,
}

impl<'a> DerivativeEngine<'a> {
    pub fn new(f: &'a ScalarFunction, a: &HermitianMatrix) -> Result<Self> {
        let sd = spectral_decompose(a);
        for &l in &sd.eigenvalues {
            f.check_derivative_domain(l)?;
        }
        Ok(Self {
            f,
            sd,
            first: None,
            second: None,
            third: None,
        })
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.sd
    }

    fn table(&mut self, order: usize) -> Result<&DividedDifferenceTable> {
        let slot = match order {
            1 => &mut self.first,
            2 => &mut self.second,
            _ => &mut self.third,
        };
        if slot.is_none() {
            *slot = Some(divided_differences(self.f, &self.sd.eigenvalues, order)?);
        }
        Ok(slot.as_ref().unwrap())
    }

    /// First divided differences `f[λᵢ, λⱼ]` as a matrix.
    pub fn first_divided_differences(&mut self) -> Result<CMatrix> {
        let d = self.sd.dim();
        let t = self.table(1)?;
        Ok(CMatrix::from_fn(d, d, |i, j| Complex64::new(t.get(&[i, j]), 0.0)))
    }

    pub fn d1(&mut self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        check(x, self.sd.dim())?;
        let g = self.first_divided_differences()?;
        let y = self.sd.to_eigenbasis(x.as_matrix());
        let z = y.component_mul(&g);
        Ok(HermitianMatrix::from_matrix_unchecked(self.sd.from_eigenbasis(&z)))
    }

    pub fn d2(&mut self, x: &HermitianMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
        let d = self.sd.dim();
        check(x, d)?;
        check(y, d)?;
        let xt = self.sd.to_eigenbasis(x.as_matrix());
        let yt = self.sd.to_eigenbasis(y.as_matrix());
        let t = self.table(2)?;
        let r = CMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .map(|k| (xt[(i, k)] * yt[(k, j)] + yt[(i, k)] * xt[(k, j)]) * t.get(&[i, k, j]))
                .sum()
        });
        Ok(HermitianMatrix::from_matrix_unchecked(self.sd.from_eigenbasis(&r)))
    }

    /// Pure divided-difference third derivative.
    pub fn d3_divided(
        &mut self,
        x: &HermitianMatrix,
        y: &HermitianMatrix,
        w: &HermitianMatrix,
    ) -> Result<HermitianMatrix> {
        let d = self.sd.dim();
        for m in [x, y, w] {
            check(m, d)?;
        }
        let ms: Vec<CMatrix> = [x, y, w].iter().map(|m| self.sd.to_eigenbasis(m.as_matrix())).collect();
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let t = self.table(3)?;
        let r = CMatrix::from_fn(d, d, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                for l in 0..d {
                    let s: Complex64 = PERMS
                        .iter()
                        .map(|p| ms[p[0]][(i, k)] * ms[p[1]][(k, l)] * ms[p[2]][(l, j)])
                        .sum();
                    acc += s * t.get(&[i, k, l, j]);
                }
            }
            acc
        });
        Ok(HermitianMatrix::from_matrix_unchecked(self.sd.from_eigenbasis(&r)))
    }
}

fn check(x: &HermitianMatrix, d: usize) -> Result<()> {
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.dim(),
        });
    }
    Ok(())
}

/// `DΦ[A](X)`.
pub fn frechet_d1(f: &ScalarFunction, a: &HermitianMatrix, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    DerivativeEngine::new(f, a)?.d1(x)
}

/// `D²Φ[A](X, Y)`, symmetric in `X, Y`.
pub fn frechet_d2(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    DerivativeEngine::new(f, a)?.d2(x, y)
}

/// `D³Φ[A](X, Y, W)` by the default hybrid rule.
pub fn frechet_d3(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    w: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    frechet_d3_with(f, a, x, y, w, ThirdOrderMethod::Hybrid)
}

pub fn frechet_d3_with(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    w: &HermitianMatrix,
    method: ThirdOrderMethod,
) -> Result<HermitianMatrix> {
    match method {
        ThirdOrderMethod::DividedDifference => DerivativeEngine::new(f, a)?.d3_divided(x, y, w),
        ThirdOrderMethod::Hybrid => {
            // validates the base point too
            DerivativeEngine::new(f, a)?;
            check(w, a.dim())?;
            let h = HYBRID_STEP_REL * (1.0 + a.spectral_norm());
            let central = |h: f64| -> Result<HermitianMatrix> {
                let plus = frechet_d2(f, &(a + &w.scale(h)), x, y)?;
                let minus = frechet_d2(f, &(a - &w.scale(h)), x, y)?;
                Ok((&plus - &minus).scale(0.5 / h))
            };
            let coarse = central(h)?;
            let fine = central(0.5 * h)?;
            Ok((&fine.scale(4.0) - &coarse).scale(1.0 / 3.0))
        }
    }
}

/// Order-`k` derivative along a single direction, `D^kΦ[A](X, …, X)`.
pub fn frechet_directional(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    x: &HermitianMatrix,
    order: usize,
) -> Result<HermitianMatrix> {
    match order {
        1 => frechet_d1(f, a, x),
        2 => frechet_d2(f, a, x, x),
        3 => frechet_d3(f, a, x, x, x),
        _ => Err(Error::InvalidParameter(format!("derivative order must be 1..=3, got {order}"))),
    }
}

/// First divided differences of `f` at the spectrum of `A`, exposed for callers
/// that build their own Daleckii–Krein products.
pub fn first_divided_difference_matrix(f: &ScalarFunction, a: &HermitianMatrix) -> Result<(SpectralDecomposition, CMatrix)> {
    let mut eng = DerivativeEngine::new(f, a)?;
    let g = eng.first_divided_differences()?;
    Ok((eng.sd, g))
}
