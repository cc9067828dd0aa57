use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{apply_scalar_function, c, hs_inner, spectral_decompose, trace, CMatrix, HermitianMatrix};
use crate::phi::{coincident_threshold, ScalarFunction};
use crate::report::VerificationReport;

use super::{frechet_d1, frechet_d2};

/// Relative tolerance of the inversion-derivative identities.
pub const INVERSION_TOL: f64 = 1e-5;
/// Relative tolerance of the chain rule and partial-derivative checks.
pub const CALCULUS_TOL: f64 = 1e-6;

const FD_STEP: f64 = 1e-3;

/// A twice differentiable map on Hermitian matrices with its derivatives.
pub trait MatrixMap: Sync {
    fn eval(&self, a: &HermitianMatrix) -> Result<HermitianMatrix>;
    fn d1(&self, a: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix>;
    fn d2(&self, a: &HermitianMatrix, h: &HermitianMatrix, k: &HermitianMatrix) -> Result<HermitianMatrix>;
}

pub struct IdentityMap;

impl MatrixMap for IdentityMap {
    fn eval(&self, a: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(a.clone())
    }
    fn d1(&self, _: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(h.clone())
    }
    fn d2(&self, a: &HermitianMatrix, _: &HermitianMatrix, _: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::zeros(a.dim()))
    }
}

pub struct ConstantMap(pub HermitianMatrix);

impl MatrixMap for ConstantMap {
    fn eval(&self, _: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(self.0.clone())
    }
    fn d1(&self, a: &HermitianMatrix, _: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::zeros(a.dim()))
    }
    fn d2(&self, a: &HermitianMatrix, _: &HermitianMatrix, _: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::zeros(a.dim()))
    }
}

/// `A ↦ f(A)` for a catalog function.
pub struct SpectralMap(pub ScalarFunction);

impl MatrixMap for SpectralMap {
    fn eval(&self, a: &HermitianMatrix) -> Result<HermitianMatrix> {
        apply_scalar_function(&self.0, a)
    }
    fn d1(&self, a: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        frechet_d1(&self.0, a, h)
    }
    fn d2(&self, a: &HermitianMatrix, h: &HermitianMatrix, k: &HermitianMatrix) -> Result<HermitianMatrix> {
        frechet_d2(&self.0, a, h, k)
    }
}

fn inverse(m: &HermitianMatrix) -> Result<CMatrix> {
    let sd = spectral_decompose(m);
    let smin = sd.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    let smax = sd.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= super::CONDITION_LIMIT) {
        return Err(Error::Singular {
            smallest_singular_value: smin,
            condition,
        });
    }
    Ok(sd.recompose_with(|l| 1.0 / l).into_matrix())
}

/// `D(G⁻¹)[A](h) = −G⁻¹ DG[A](h) G⁻¹`.
pub fn inversion_first_derivative(g: &dyn MatrixMap, a: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let gi = inverse(&g.eval(a)?)?;
    let dh = g.d1(a, h)?;
    Ok(HermitianMatrix::from_matrix_unchecked(-(&gi * dh.as_matrix() * &gi)))
}

/// `D²(G⁻¹)[A](h, k) = G⁻¹ DG(h) G⁻¹ DG(k) G⁻¹ + G⁻¹ DG(k) G⁻¹ DG(h) G⁻¹ − G⁻¹ D²G(h, k) G⁻¹`.
pub fn inversion_second_derivative(
    g: &dyn MatrixMap,
    a: &HermitianMatrix,
    h: &HermitianMatrix,
    k: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    let gi = inverse(&g.eval(a)?)?;
    let dh = g.d1(a, h)?;
    let dk = g.d1(a, k)?;
    let dhk = g.d2(a, h, k)?;
    let ph = &gi * dh.as_matrix() * &gi;
    let pk = &gi * dk.as_matrix() * &gi;
    let m = &ph * dk.as_matrix() * &gi + &pk * dh.as_matrix() * &gi - &gi * dhk.as_matrix() * &gi;
    Ok(HermitianMatrix::from_matrix_unchecked(m))
}

fn relative_error(approx: &HermitianMatrix, exact: &HermitianMatrix) -> f64 {
    let diff = (approx - exact).frobenius_norm();
    if diff == 0.0 {
        0.0
    } else {
        diff / exact.frobenius_norm().max(1e-12)
    }
}

fn richardson(coarse: HermitianMatrix, fine: HermitianMatrix) -> HermitianMatrix {
    (&fine.scale(4.0) - &coarse).scale(1.0 / 3.0)
}

fn scaled_step(a: &HermitianMatrix, dirs: &[&HermitianMatrix]) -> f64 {
    let dn = dirs.iter().map(|d| d.spectral_norm()).fold(0.0, f64::max);
    if dn == 0.0 {
        FD_STEP
    } else {
        FD_STEP * (1.0 + a.spectral_norm()) / dn
    }
}

/// Compares both inversion identities with finite differences of
/// `A ↦ G(A)⁻¹`; the reported error is the worse of the two relative errors.
pub fn inversion_derivative_check(
    g: &dyn MatrixMap,
    a: &HermitianMatrix,
    h: &HermitianMatrix,
    k: &HermitianMatrix,
) -> Result<VerificationReport> {
    a.check_dim(h)?;
    a.check_dim(k)?;
    let inv_at = |m: &HermitianMatrix| -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::from_matrix_unchecked(inverse(&g.eval(m)?)?))
    };
    let step = scaled_step(a, &[h, k]);

    let first_fd = |s: f64| -> Result<HermitianMatrix> {
        let p = inv_at(&(a + &h.scale(s)))?;
        let m = inv_at(&(a - &h.scale(s)))?;
        Ok((&p - &m).scale(0.5 / s))
    };
    let second_fd = |s: f64| -> Result<HermitianMatrix> {
        let pp = inv_at(&(&(a + &h.scale(s)) + &k.scale(s)))?;
        let pm = inv_at(&(&(a + &h.scale(s)) - &k.scale(s)))?;
        let mp = inv_at(&(&(a - &h.scale(s)) + &k.scale(s)))?;
        let mm = inv_at(&(&(a - &h.scale(s)) - &k.scale(s)))?;
        Ok((&(&pp - &pm) - &(&mp - &mm)).scale(0.25 / (s * s)))
    };

    let d1 = inversion_first_derivative(g, a, h)?;
    let d2 = inversion_second_derivative(g, a, h, k)?;
    let fd1 = richardson(first_fd(step)?, first_fd(0.5 * step)?);
    let fd2 = richardson(second_fd(step)?, second_fd(0.5 * step)?);
    let e1 = relative_error(&fd1, &d1);
    let e2 = relative_error(&fd2, &d2);
    Ok(
        VerificationReport::from_error("inversion_derivative", e1.max(e2), INVERSION_TOL).with_witness(
            serde_json::json!({ "first_order_error": e1, "second_order_error": e2 }),
        ),
    )
}

/// First divided differences of `f∘g` at the spectrum of `A`, evaluated on
/// the composite scalar function directly.
fn composite_first_dd(f: &ScalarFunction, g: &ScalarFunction, nodes: &[f64]) -> CMatrix {
    let d = nodes.len();
    let delta = coincident_threshold(nodes);
    let comp = |u: f64| f.value(g.value(u));
    let comp_prime = |u: f64| f.eval_1(g.value(u)) * g.eval_1(u);
    CMatrix::from_fn(d, d, |i, j| {
        let (x, y) = (nodes[i], nodes[j]);
        let v = if (x - y).abs() <= delta {
            comp_prime(0.5 * (x + y))
        } else {
            (comp(x) - comp(y)) / (x - y)
        };
        c(v)
    })
}

/// `D(f∘g)[A](h)` computed on the composite versus `Df[g(A)](Dg[A](h))`.
pub fn chain_rule_check(
    f: &ScalarFunction,
    g: &ScalarFunction,
    a: &HermitianMatrix,
    h: &HermitianMatrix,
) -> Result<VerificationReport> {
    a.check_dim(h)?;
    let sd = spectral_decompose(a);
    for &l in &sd.eigenvalues {
        g.check_derivative_domain(l)?;
        f.check_derivative_domain(g.value(l))?;
    }
    let dd = composite_first_dd(f, g, &sd.eigenvalues);
    let direct =
        HermitianMatrix::from_matrix_unchecked(sd.from_eigenbasis(&sd.to_eigenbasis(h.as_matrix()).component_mul(&dd)));
    let ga = apply_scalar_function(g, a)?;
    let chained = frechet_d1(f, &ga, &frechet_d1(g, a, h)?)?;
    Ok(VerificationReport::from_error(
        "chain_rule",
        relative_error(&chained, &direct),
        CALCULUS_TOL,
    ))
}

/// A differentiable map of two Hermitian arguments with its partials.
pub trait BivariateMap: Sync {
    fn eval(&self, x: &HermitianMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix>;
    /// `D_X F[X, Y](h)`.
    fn dx(&self, x: &HermitianMatrix, y: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix>;
    /// `D_Y F[X, Y](k)`.
    fn dy(&self, x: &HermitianMatrix, y: &HermitianMatrix, k: &HermitianMatrix) -> Result<HermitianMatrix>;
}

/// `F(X, Y) = X + Y`.
pub struct SumMap;

impl BivariateMap for SumMap {
    fn eval(&self, x: &HermitianMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
        x.check_dim(y)?;
        Ok(x + y)
    }
    fn dx(&self, _: &HermitianMatrix, _: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(h.clone())
    }
    fn dy(&self, _: &HermitianMatrix, _: &HermitianMatrix, k: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(k.clone())
    }
}

/// Jordan product `F(X, Y) = (XY + YX) / 2`.
pub struct ProductMap;

impl BivariateMap for ProductMap {
    fn eval(&self, x: &HermitianMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
        x.check_dim(y)?;
        Ok(x.anticommutator(y).scale(0.5))
    }
    fn dx(&self, _: &HermitianMatrix, y: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(h.anticommutator(y).scale(0.5))
    }
    fn dy(&self, x: &HermitianMatrix, _: &HermitianMatrix, k: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(x.anticommutator(k).scale(0.5))
    }
}

/// Convexity gap `F(X, Y) = tΦ(X) + (1−t)Φ(Y) − Φ(tX + (1−t)Y)`.
pub struct GapMap {
    pub phi: ScalarFunction,
    pub t: f64,
}

impl GapMap {
    fn mid(&self, x: &HermitianMatrix, y: &HermitianMatrix) -> HermitianMatrix {
        &x.scale(self.t) + &y.scale(1.0 - self.t)
    }
}

impl BivariateMap for GapMap {
    fn eval(&self, x: &HermitianMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
        x.check_dim(y)?;
        let t = self.t;
        let fx = apply_scalar_function(&self.phi, x)?;
        let fy = apply_scalar_function(&self.phi, y)?;
        let fm = apply_scalar_function(&self.phi, &self.mid(x, y))?;
        Ok(&(&fx.scale(t) + &fy.scale(1.0 - t)) - &fm)
    }
    fn dx(&self, x: &HermitianMatrix, y: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        let t = self.t;
        let a = frechet_d1(&self.phi, x, h)?;
        let b = frechet_d1(&self.phi, &self.mid(x, y), h)?;
        Ok((&a - &b).scale(t))
    }
    fn dy(&self, x: &HermitianMatrix, y: &HermitianMatrix, k: &HermitianMatrix) -> Result<HermitianMatrix> {
        let s = 1.0 - self.t;
        let a = frechet_d1(&self.phi, y, k)?;
        let b = frechet_d1(&self.phi, &self.mid(x, y), k)?;
        Ok((&a - &b).scale(s))
    }
}

/// `DF[X, Y](h, k)` by finite differences of `t ↦ F(X + th, Y + tk)` versus
/// `D_X F(h) + D_Y F(k)`.
pub fn partial_derivative_check(
    f: &dyn BivariateMap,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    h: &HermitianMatrix,
    k: &HermitianMatrix,
) -> Result<VerificationReport> {
    x.check_dim(y)?;
    x.check_dim(h)?;
    x.check_dim(k)?;
    let scale = 1.0 + x.spectral_norm().max(y.spectral_norm());
    let dn = h.spectral_norm().max(k.spectral_norm());
    let step = if dn == 0.0 { FD_STEP } else { FD_STEP * scale / dn };
    let central = |s: f64| -> Result<HermitianMatrix> {
        let p = f.eval(&(x + &h.scale(s)), &(y + &k.scale(s)))?;
        let m = f.eval(&(x - &h.scale(s)), &(y - &k.scale(s)))?;
        Ok((&p - &m).scale(0.5 / s))
    };
    let fd = richardson(central(step)?, central(0.5 * step)?);
    let partials = &f.dx(x, y, h)? + &f.dy(x, y, k)?;
    Ok(VerificationReport::from_error(
        "partial_derivative",
        relative_error(&fd, &partials),
        CALCULUS_TOL,
    ))
}

/// The three expressions of the trace-duality identity
/// `Tr D²Φ[A](X, Y) = ⟨X, DΦ′[A](Y)⟩ = ⟨Y, DΦ′[A](X)⟩`.
#[derive(Clone, Debug, Serialize)]
pub struct TraceDuality {
    pub trace_second: f64,
    pub via_y: f64,
    pub via_x: f64,
    pub relative_error: f64,
}

pub fn trace_duality(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
) -> Result<TraceDuality> {
    let psi = f.derivative();
    let trace_second = trace(&frechet_d2(f, a, x, y)?);
    let via_y = hs_inner(x, &frechet_d1(&psi, a, y)?).re;
    let via_x = hs_inner(y, &frechet_d1(&psi, a, x)?).re;
    let spread = (trace_second - via_y).abs().max((trace_second - via_x).abs());
    let relative_error = if spread == 0.0 {
        0.0
    } else {
        spread / trace_second.abs().max(via_x.abs()).max(1e-300)
    };
    Ok(TraceDuality {
        trace_second,
        via_y,
        via_x,
        relative_error,
    })
}
