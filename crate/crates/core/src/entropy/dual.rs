use serde_json::json;

use crate::error::{Error, Result};
use crate::frechet::frechet_d1;
use crate::linalg::{normalized_trace, psd_verdict, weighted_sum, HermitianMatrix};
use crate::phi::ScalarFunction;
use crate::report::VerificationReport;

use super::{operator_phi_entropy, phi_scale, MatrixEnsemble, Variant};

/// Tolerance (relative to the Φ-scale of the ensembles) of the variational checks.
pub const DUAL_REL_TOL: f64 = 1e-9;

fn check_coupling(z: &MatrixEnsemble, t: &MatrixEnsemble) -> Result<()> {
    if !z.is_coupled_with(t) {
        return Err(Error::InvalidEnsemble(
            "Z and T must share dimension, sample space and weights".into(),
        ));
    }
    for (k, a) in t.atoms().iter().enumerate() {
        let lo = a.min_eigenvalue();
        if !(lo > 0.0) {
            return Err(Error::InvalidEnsemble(format!(
                "T atom {k} is not positive definite (min eigenvalue {lo:e})"
            )));
        }
    }
    Ok(())
}

/// `E[DΦ[T](Z − T) − DΦ[ET](Z − T)] + EΦ(T) − Φ(ET)`.
pub fn dual_value(f: &ScalarFunction, z: &MatrixEnsemble, t: &MatrixEnsemble) -> Result<HermitianMatrix> {
    check_coupling(z, t)?;
    let local = z
        .atoms()
        .iter()
        .zip(t.atoms())
        .map(|(zk, tk)| frechet_d1(f, tk, &(zk - tk)))
        .collect::<Result<Vec<_>>>()?;
    let first = weighted_sum(z.weights().iter().copied().zip(local.iter()));
    let et = t.expectation();
    let second = frechet_d1(f, &et, &(&z.expectation() - &et))?;
    Ok(&(&first - &second) + &operator_phi_entropy(f, t)?)
}

fn judge(name: String, diff: &HermitianMatrix, variant: Variant, tol: f64) -> (VerificationReport, Option<serde_json::Value>) {
    match variant {
        Variant::Trace => (VerificationReport::from_margin(name, normalized_trace(diff), tol), None),
        Variant::Operator => {
            let v = psd_verdict(diff, tol);
            (
                VerificationReport::from_margin(name, v.min_eigenvalue, tol),
                v.witness_vector.map(|w| json!(w)),
            )
        }
    }
}

/// `H_Φ(Z) − value(T)`: nonnegative for in-class `Φ`, and exactly zero at `T ≡ Z`.
pub fn dual_representation_gap(
    f: &ScalarFunction,
    z: &MatrixEnsemble,
    t: &MatrixEnsemble,
    variant: Variant,
) -> Result<VerificationReport> {
    let value = dual_value(f, z, t)?;
    let h = operator_phi_entropy(f, z)?;
    let tol = DUAL_REL_TOL * phi_scale(f, z.atoms().iter().chain(t.atoms()));
    let (r, dir) = judge(format!("dual_representation/{variant}"), &(&h - &value), variant, tol);
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "z": z, "t": t, "direction": dir }))
    })
}

/// `F(s)` along `T_s = (1 − s)Z + sT` for each grid point.
pub fn interpolation_values(
    f: &ScalarFunction,
    z: &MatrixEnsemble,
    t: &MatrixEnsemble,
    grid: &[f64],
) -> Result<Vec<HermitianMatrix>> {
    if !z.is_coupled_with(t) {
        return Err(Error::InvalidEnsemble(
            "Z and T must share dimension, sample space and weights".into(),
        ));
    }
    grid.iter()
        .map(|&s| {
            let ts = MatrixEnsemble::new(
                z.iter()
                    .zip(t.atoms())
                    .map(|((w, zk), tk)| (w, &zk.scale(1.0 - s) + &tk.scale(s)))
                    .collect(),
            )?;
            dual_value(f, z, &ts)
        })
        .collect()
}

/// Checks that `F` is nonincreasing (in the variant's order) along an
/// ascending grid in `[0, 1]`.
pub fn interpolation_derivative_scan(
    f: &ScalarFunction,
    z: &MatrixEnsemble,
    t: &MatrixEnsemble,
    grid: &[f64],
    variant: Variant,
) -> Result<VerificationReport> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) || grid[0] < 0.0 || grid[grid.len() - 1] > 1.0 {
        return Err(Error::InvalidParameter(
            "grid must be strictly ascending in [0, 1] with at least two points".into(),
        ));
    }
    let values = interpolation_values(f, z, t, grid)?;
    let tol = DUAL_REL_TOL * phi_scale(f, z.atoms().iter().chain(t.atoms()));
    let name = format!("interpolation/{variant}");
    let mut worst: Option<(VerificationReport, usize, Option<serde_json::Value>)> = None;
    for k in 0..values.len() - 1 {
        let (r, dir) = judge(name.clone(), &(&values[k] - &values[k + 1]), variant, tol);
        if worst.as_ref().is_none_or(|(w, _, _)| r.margin < w.margin) {
            worst = Some((r, k, dir));
        }
    }
    let (r, k, dir) = worst.unwrap();
    let r = r.with_trials(grid.len() as u64 - 1);
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "z": z, "t": t, "s": [grid[k], grid[k + 1]], "direction": dir }))
    })
}
