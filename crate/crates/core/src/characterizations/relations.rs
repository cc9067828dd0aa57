use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{trace, HermitianMatrix};
use crate::phi::ScalarFunction;
use crate::quadrature::gauss_legendre;
use crate::report::VerificationReport;
use crate::trials::{run_trials, TrialConfig};

use super::{functional_matrix, sample_pair, FunctionalKind};

pub const RELATION_TOL: f64 = 1e-6;
/// Observed convergence order may fall this far below 1.
const ORDER_SLACK: f64 = 0.1;
/// Ratio errors below this are treated as converged.
const RATIO_FLOOR: f64 = 1e-9;

fn tr_functional(kind: FunctionalKind, f: &ScalarFunction, u: &HermitianMatrix, v: &HermitianMatrix) -> Result<f64> {
    Ok(trace(&functional_matrix(kind, f, None, u, v)?))
}

fn rel(approx: f64, exact: f64) -> f64 {
    let diff = (approx - exact).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / exact.abs().max(f64::MIN_POSITIVE)
    }
}

/// `A_Φ(u,v) = ∫₀¹ (1−s) C_Φ(u+sv, v) ds` and `B_Φ(u,v) = ∫₀¹ C_Φ(u+sv, v) ds`
/// by Gauss-Legendre quadrature; reports the worse relative error.
pub fn integral_relation_check(
    f: &ScalarFunction,
    u: &HermitianMatrix,
    v: &HermitianMatrix,
    points: usize,
) -> Result<VerificationReport> {
    if points == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one point".into()));
    }
    let a = tr_functional(FunctionalKind::BregmanA, f, u, v)?;
    let b = tr_functional(FunctionalKind::MapB, f, u, v)?;
    let (nodes, weights) = gauss_legendre(points);
    let (mut qa, mut qb) = (0.0, 0.0);
    for (&s, &w) in nodes.iter().zip(&weights) {
        let c = tr_functional(FunctionalKind::MapC, f, &(u + &v.scale(s)), v)?;
        qa += w * (1.0 - s) * c;
        qb += w * c;
    }
    let (ea, eb) = (rel(qa, a), rel(qb, b));
    let r = VerificationReport::from_error(format!("integral_relation/{f}"), ea.max(eb), RELATION_TOL);
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "u": u, "v": v, "a": a, "a_quadrature": qa, "b": b, "b_quadrature": qb }))
    })
}

pub fn integral_relation_sweep(f: &ScalarFunction, cfg: &TrialConfig, points: usize) -> Result<VerificationReport> {
    run_trials(&format!("integral_relation/{f}"), cfg, |rng, _| {
        let (u, v) = sample_pair(rng, FunctionalKind::BregmanA, cfg);
        integral_relation_check(f, &u, &v, points)
    })
}

/// Second-order Taylor behavior `A_Φ(u, εv) ≈ ½C_Φ(u,v)ε²` and
/// `B_Φ(u, εv) ≈ C_Φ(u,v)ε²` along a decreasing `eps` sequence.
///
/// Margin is the smallest observed convergence order of the ratio errors
/// minus one; steps whose error is already at the rounding level are skipped.
pub fn taylor_relation_check(
    f: &ScalarFunction,
    u: &HermitianMatrix,
    v: &HermitianMatrix,
    eps: &[f64],
) -> Result<VerificationReport> {
    if eps.len() < 2 || eps.windows(2).any(|w| !(w[0] > w[1] && w[1] > 0.0)) {
        return Err(Error::InvalidParameter("eps must be strictly decreasing and positive, with two or more entries".into()));
    }
    let name = format!("taylor_relation/{f}");
    let c = tr_functional(FunctionalKind::MapC, f, u, v)?;
    let mut errs_a = Vec::new();
    let mut errs_b = Vec::new();
    for &e in eps {
        let ve = v.scale(e);
        let a = tr_functional(FunctionalKind::BregmanA, f, u, &ve)?;
        let b = tr_functional(FunctionalKind::MapB, f, u, &ve)?;
        if c == 0.0 {
            // v = 0 or a flat direction: both sides must vanish
            errs_a.push(a.abs());
            errs_b.push(b.abs());
        } else {
            errs_a.push((a / (0.5 * c * e * e) - 1.0).abs());
            errs_b.push((b / (c * e * e) - 1.0).abs());
        }
    }
    // rounding level of the ratios: cancellation against |Φ(u)| at scale cε²
    let phi_mass: f64 = crate::linalg::eigenvalues(u).iter().map(|&l| f.value(l).abs()).sum();
    let noise = |e: f64| 64.0 * f64::EPSILON * (1.0 + phi_mass) / (c.abs() * e * e).max(f64::MIN_POSITIVE);
    let mut worst_order = f64::INFINITY;
    for errs in [&errs_a, &errs_b] {
        for k in 0..eps.len() - 1 {
            if errs[k + 1] <= RATIO_FLOOR.max(noise(eps[k + 1])) {
                continue;
            }
            let order = (errs[k] / errs[k + 1]).ln() / (eps[k] / eps[k + 1]).ln();
            worst_order = worst_order.min(order);
        }
    }
    let margin = if worst_order.is_finite() { worst_order - 1.0 } else { 0.0 };
    let r = VerificationReport::from_margin(name, margin, ORDER_SLACK);
    Ok(if r.holds {
        r.with_witness(json!({ "ratio_error_a": errs_a, "ratio_error_b": errs_b }))
    } else {
        r.with_witness(json!({ "u": u, "v": v, "eps": eps, "ratio_error_a": errs_a, "ratio_error_b": errs_b }))
    })
}
