use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{psd_verdict, schatten_norm_pow, weighted_sum, HermitianMatrix};
use crate::report::VerificationReport;

use super::{variance, ProductEnsemble, ENTROPY_REL_TOL};

/// `½ Σᵢ E(Z − Z̃⁽ⁱ⁾)²`, where `Z̃⁽ⁱ⁾` resamples factor `i` independently.
/// Evaluated as an exact double sum over each factor's support.
pub fn efron_stein_quantity(p: &ProductEnsemble) -> Result<HermitianMatrix> {
    let outcomes = p.outcomes();
    let mut terms: Vec<(f64, HermitianMatrix)> = Vec::new();
    for i in 0..p.n_factors() {
        for (tuple, w) in &outcomes {
            let z = p.z(tuple)?;
            for (xi, &wi) in p.factors()[i].iter().enumerate() {
                if xi == tuple[i] {
                    continue;
                }
                let diff = z - p.resampled(tuple, i, xi)?;
                terms.push((0.5 * w * wi, diff.square()));
            }
        }
    }
    if terms.is_empty() {
        return Ok(HermitianMatrix::zeros(p.dim()));
    }
    Ok(weighted_sum(terms.iter().map(|(w, m)| (*w, m))))
}

fn norm_scale(p: &ProductEnsemble) -> f64 {
    let m = p.images().iter().map(|a| a.spectral_norm()).fold(0.0, f64::max);
    1.0 + m * m
}

/// `Var(Z) ⪯ E(Z)`; margin is the smallest eigenvalue of the difference.
pub fn check_operator_efron_stein(p: &ProductEnsemble) -> Result<VerificationReport> {
    let es = efron_stein_quantity(p)?;
    let var = variance(&p.joint());
    let tol = ENTROPY_REL_TOL * norm_scale(p);
    let v = psd_verdict(&(&es - &var), tol);
    let r = VerificationReport::from_margin("efron_stein/operator", v.min_eigenvalue, tol);
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "product": p, "direction": v.witness_vector }))
    })
}

/// `‖Var(Z)‖_p^p ≤ ‖E(Z)‖_p^p` for a natural exponent `p ≥ 1`.
pub fn check_polynomial_efron_stein(p: &ProductEnsemble, exponent: u32) -> Result<VerificationReport> {
    if exponent == 0 {
        return Err(Error::InvalidParameter("Schatten exponent must be a natural number >= 1".into()));
    }
    let q = exponent as f64;
    let es = efron_stein_quantity(p)?;
    let var = variance(&p.joint());
    let rhs = schatten_norm_pow(&es, q)?;
    let lhs = schatten_norm_pow(&var, q)?;
    let tol = ENTROPY_REL_TOL * (p.dim() as f64) * norm_scale(p).powf(q);
    let r = VerificationReport::from_margin(format!("efron_stein/schatten_{exponent}"), rhs - lhs, tol);
    Ok(if r.holds { r } else { r.with_witness(json!({ "product": p })) })
}
