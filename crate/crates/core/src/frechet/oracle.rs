use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{apply_scalar_function, eigenvalues, HermitianMatrix};
use crate::phi::ScalarFunction;
use crate::report::VerificationReport;
use crate::sampling::{sample_direction, sample_spectrum_in};
use crate::trials::{run_trials, TrialConfig};

use super::frechet_directional;

const BASE_STEP: [f64; 3] = [1e-4, 1e-3, 5e-3];

/// Relative agreement required between divided differences and the oracle, by order.
pub const ORACLE_REL_TOL: [f64; 3] = [1e-6, 1e-4, 1e-3];

/// Step used by the oracle when the caller has no preference:
/// `base(order) · (1 + ‖A‖₂) / ‖X‖₂`.
pub fn default_fd_step(order: usize, a: &HermitianMatrix, x: &HermitianMatrix) -> f64 {
    let base = BASE_STEP[order.clamp(1, 3) - 1];
    let xn = x.spectral_norm();
    if xn == 0.0 {
        base
    } else {
        base * (1.0 + a.spectral_norm()) / xn
    }
}

/// Central-difference stencil for `D^kΦ[A](X, …, X)`.
pub fn finite_diff_oracle(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    x: &HermitianMatrix,
    order: usize,
    step: f64,
) -> Result<HermitianMatrix> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    a.check_dim(x)?;
    let at = |t: f64| apply_scalar_function(f, &(a + &x.scale(t)));
    let h = step;
    match order {
        1 => {
            let p = at(h)?;
            let m = at(-h)?;
            Ok((&p - &m).scale(0.5 / h))
        }
        2 => {
            let p = at(h)?;
            let z = at(0.0)?;
            let m = at(-h)?;
            Ok((&(&p + &m) - &z.scale(2.0)).scale(1.0 / (h * h)))
        }
        3 => {
            let p2 = at(2.0 * h)?;
            let p1 = at(h)?;
            let m1 = at(-h)?;
            let m2 = at(-2.0 * h)?;
            let num = &(&(&p2 - &m2) - &p1.scale(2.0)) + &m1.scale(2.0);
            Ok(num.scale(0.5 / (h * h * h)))
        }
        _ => Err(Error::InvalidParameter(format!("oracle order must be 1..=3, got {order}"))),
    }
}

/// One Richardson step on the central stencil: `(4·D(h/2) − D(h)) / 3`.
pub fn finite_diff_oracle_richardson(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    x: &HermitianMatrix,
    order: usize,
    step: f64,
) -> Result<HermitianMatrix> {
    let coarse = finite_diff_oracle(f, a, x, order, step)?;
    let fine = finite_diff_oracle(f, a, x, order, 0.5 * step)?;
    Ok((&fine.scale(4.0) - &coarse).scale(1.0 / 3.0))
}

/// Divided-difference `D^kΦ[A](X, …, X)` against the Richardson oracle.
///
/// The error is measured in spectral norm relative to
/// `max(‖D^kΦ‖₂, ‖X‖₂^k (1 + max|Φ⁽ᵏ⁾(λ)|))`, so derivatives that vanish
/// identically are compared on the scale of the direction.
pub fn oracle_agreement_check(
    f: &ScalarFunction,
    a: &HermitianMatrix,
    x: &HermitianMatrix,
    order: usize,
) -> Result<VerificationReport> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!("derivative order must be 1..=3, got {order}")));
    }
    let exact = frechet_directional(f, a, x, order)?;
    let fd = finite_diff_oracle_richardson(f, a, x, order, default_fd_step(order, a, x))?;
    let peak = eigenvalues(a).iter().map(|&l| f.deriv(order, l).abs()).fold(0.0, f64::max);
    let scale = exact.spectral_norm().max(x.spectral_norm().powi(order as i32) * (1.0 + peak));
    let err = (&exact - &fd).spectral_norm();
    let rel = if err == 0.0 { 0.0 } else { err / scale.max(f64::MIN_POSITIVE) };
    let r = VerificationReport::from_error(format!("frechet_oracle/d{order}/{f}"), rel, ORACLE_REL_TOL[order - 1]);
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "a": a, "x": x, "exact": exact, "oracle": fd }))
    })
}

/// [`oracle_agreement_check`] on sampled `A` (spectrum in the configured window) and unit `X`.
pub fn oracle_agreement_sweep(f: &ScalarFunction, cfg: &TrialConfig, order: usize) -> Result<VerificationReport> {
    let (lo, hi) = cfg.spectrum;
    run_trials(&format!("frechet_oracle/d{order}/{f}"), cfg, |rng, _| {
        let a = sample_spectrum_in(rng, cfg.dim, lo, hi);
        let x = sample_direction(rng, cfg.dim);
        oracle_agreement_check(f, &a, &x, order)
    })
}
