use rand::Rng;
use serde_json::json;

use crate::error::Result;
use crate::frechet::{frechet_d2, frechet_d3, superop_inverse, superop_matrix, SuperOperatorMatrix};
use crate::linalg::{hs_inner, HermitianMatrix};
use crate::phi::{ClassTag, ScalarFunction};
use crate::report::VerificationReport;
use crate::sampling::{sample_direction, sample_spectrum_in};
use crate::trials::{run_trials, TrialConfig};

use super::{class_gate, DEFAULT_LAMBDAS};

pub const CONDITION_A_REL_TOL: f64 = 1e-9;
/// Relative slack of condition (e).
pub const CONDITION_E_REL_TOL: f64 = 1e-4;

fn inverse_derivative(f: &ScalarFunction, a: &HermitianMatrix) -> Result<SuperOperatorMatrix> {
    superop_inverse(&superop_matrix(&f.derivative(), a)?)
}

/// `q(A) = Tr[h (DΨ[A])⁻¹(h)]`.
fn quadratic(f: &ScalarFunction, a: &HermitianMatrix, h: &HermitianMatrix) -> Result<f64> {
    inverse_derivative(f, a)?.quadratic_form(h)
}

fn concavity_report(
    f: &ScalarFunction,
    (a1, q1): (&HermitianMatrix, f64),
    (a2, q2): (&HermitianMatrix, f64),
    h: &HermitianMatrix,
    l: f64,
) -> Result<VerificationReport> {
    let al = &a1.scale(l) + &a2.scale(1.0 - l);
    let ql = quadratic(f, &al, h)?;
    let tol = CONDITION_A_REL_TOL * (1.0 + q1.abs() + q2.abs() + ql.abs());
    Ok(VerificationReport::from_margin(format!("condition_a/{f}"), ql - l * q1 - (1.0 - l) * q2, tol))
}

/// Concavity slack of the inverse-derivative quadratic form at one segment point.
pub fn condition_a_at(
    f: &ScalarFunction,
    a1: &HermitianMatrix,
    a2: &HermitianMatrix,
    h: &HermitianMatrix,
    l: f64,
) -> Result<VerificationReport> {
    if f.is_affine() {
        return Ok(VerificationReport::from_margin(format!("condition_a/{f}"), 0.0, 0.0));
    }
    concavity_report(f, (a1, quadratic(f, a1, h)?), (a2, quadratic(f, a2, h)?), h, l)
}

/// Concavity of `A ↦ Tr[h (DΨ[A])⁻¹(h)]` on sampled segments. Affine `Φ`
/// has no inverse derivative and passes with zero margin.
pub fn condition_a_check(f: &ScalarFunction, cfg: &TrialConfig) -> Result<VerificationReport> {
    class_gate(f, ClassTag::C2, cfg.allow_outside_class)?;
    let check = format!("condition_a/{f}");
    if f.is_affine() {
        cfg.validate()?;
        return Ok(VerificationReport::from_margin(check, 0.0, 0.0).with_trials(cfg.trials));
    }
    let (lo, hi) = cfg.spectrum;
    run_trials(&check, cfg, |rng, _| {
        let a1 = sample_spectrum_in(rng, cfg.dim, lo, hi);
        let a2 = sample_spectrum_in(rng, cfg.dim, lo, hi);
        let h = sample_direction(rng, cfg.dim);
        let q1 = quadratic(f, &a1, &h)?;
        let q2 = quadratic(f, &a2, &h)?;
        let mut ls = DEFAULT_LAMBDAS.to_vec();
        ls.push(rng.random_range(0.0..1.0));
        ls.push(rng.random_range(0.0..1.0));
        let mut worst: Option<VerificationReport> = None;
        for l in ls {
            let mut r = concavity_report(f, (&a1, q1), (&a2, q2), &h, l)?;
            if !r.holds {
                r = r.with_witness(json!({ "lambda": l, "a1": a1, "a2": a2, "h": h }));
            }
            if worst.as_ref().is_none_or(|w| r.normalized_margin() < w.normalized_margin()) {
                worst = Some(r);
            }
        }
        Ok(worst.unwrap())
    })
}

/// Both sides of the third-order trace inequality at `(A, h, k)`:
/// `Tr[h T⁻¹(D³Ψ[A](k, k, T⁻¹h))] ≥ 2 Tr[h T⁻¹(D²Ψ[A](k, T⁻¹(D²Ψ[A](k, T⁻¹h))))]`
/// with `T = DΨ[A]`.
pub fn condition_e_sides(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    h: &HermitianMatrix,
    k: &HermitianMatrix,
) -> Result<(f64, f64)> {
    a.check_dim(h)?;
    a.check_dim(k)?;
    let psi = f.derivative();
    let tinv = inverse_derivative(f, a)?;
    let x = tinv.apply_hermitian(h)?;
    let third = frechet_d3(&psi, a, k, k, &x)?;
    let lhs = hs_inner(h, &tinv.apply_hermitian(&third)?).re;
    let inner = tinv.apply_hermitian(&frechet_d2(&psi, a, k, &x)?)?;
    let outer = frechet_d2(&psi, a, k, &inner)?;
    let rhs = 2.0 * hs_inner(h, &tinv.apply_hermitian(&outer)?).re;
    Ok((lhs, rhs))
}

pub fn condition_e_check(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    h: &HermitianMatrix,
    k: &HermitianMatrix,
) -> Result<VerificationReport> {
    let (lhs, rhs) = condition_e_sides(f, a, h, k)?;
    let tol = CONDITION_E_REL_TOL * (lhs.abs() + rhs.abs()) + f64::MIN_POSITIVE;
    let r = VerificationReport::from_margin(format!("condition_e/{f}"), lhs - rhs, tol);
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "a": a, "h": h, "k": k, "lhs": lhs, "rhs": rhs }))
    })
}

/// [`condition_e_check`] on sampled `A` (spectrum in the configured window)
/// and unit directions `h, k`.
pub fn condition_e_sweep(f: &ScalarFunction, cfg: &TrialConfig) -> Result<VerificationReport> {
    class_gate(f, ClassTag::C2, cfg.allow_outside_class)?;
    let (lo, hi) = cfg.spectrum;
    if f.is_affine() {
        cfg.validate()?;
        return Ok(VerificationReport::from_margin(format!("condition_e/{f}"), 0.0, 0.0).with_trials(cfg.trials));
    }
    run_trials(&format!("condition_e/{f}"), cfg, |rng, _| {
        let a = sample_spectrum_in(rng, cfg.dim, lo, hi);
        let h = sample_direction(rng, cfg.dim);
        let k = sample_direction(rng, cfg.dim);
        condition_e_check(f, &a, &h, &k)
    })
}
