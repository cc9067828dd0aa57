//! Φ-entropies of finitely supported random matrices.
//!
//! The trace variant is `tr[EΦ(Z) − Φ(EZ)]` with the normalized trace
//! `tr = Tr/d`; the operator variant keeps the matrix `EΦ(Z) − Φ(EZ)`.
//! Characterization functionals elsewhere in the crate use the
//! unnormalized trace.

mod dual;
mod efron_stein;
mod ensemble;

pub use dual::{dual_representation_gap, dual_value, interpolation_derivative_scan, interpolation_values};
pub use efron_stein::{check_operator_efron_stein, check_polynomial_efron_stein, efron_stein_quantity};
pub use ensemble::{IntegrateOver, MatrixEnsemble, ProductEnsemble, PSD_REL_TOL, SPECTRAL_FLOOR, WEIGHT_SUM_TOL};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{apply_scalar_function, normalized_trace, psd_verdict, weighted_sum, HermitianMatrix};
use crate::phi::{ClassTag, ScalarFunction};
use crate::report::VerificationReport;

/// Relative tolerance of ensemble-level inequalities.
pub const ENTROPY_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Trace,
    Operator,
}

impl Variant {
    /// Class a function must carry for the variant's subadditivity to be expected.
    pub fn required_class(self) -> ClassTag {
        match self {
            Variant::Trace => ClassTag::C2,
            Variant::Operator => ClassTag::C3,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Trace => "trace",
            Variant::Operator => "operator",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(Variant::Trace),
            "operator" => Ok(Variant::Operator),
            other => Err(Error::InvalidParameter(format!("unknown variant `{other}` (trace|operator)"))),
        }
    }
}

/// Entropy of either variant.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum EntropyValue {
    Scalar(f64),
    Matrix(HermitianMatrix),
}

impl EntropyValue {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            EntropyValue::Scalar(v) => Some(*v),
            EntropyValue::Matrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&HermitianMatrix> {
        match self {
            EntropyValue::Matrix(m) => Some(m),
            EntropyValue::Scalar(_) => None,
        }
    }
}

pub fn expectation(e: &MatrixEnsemble) -> HermitianMatrix {
    e.expectation()
}

/// `EΦ(Z) − Φ(EZ)`.
pub fn operator_phi_entropy(f: &ScalarFunction, e: &MatrixEnsemble) -> Result<HermitianMatrix> {
    let mean_phi = e.expect_with(|a| apply_scalar_function(f, a))?;
    let phi_mean = apply_scalar_function(f, &e.expectation())?;
    Ok(&mean_phi - &phi_mean)
}

/// `tr[EΦ(Z) − Φ(EZ)]`.
pub fn matrix_phi_entropy(f: &ScalarFunction, e: &MatrixEnsemble) -> Result<f64> {
    Ok(normalized_trace(&operator_phi_entropy(f, e)?))
}

pub fn phi_entropy(f: &ScalarFunction, e: &MatrixEnsemble, variant: Variant) -> Result<EntropyValue> {
    Ok(match variant {
        Variant::Trace => EntropyValue::Scalar(matrix_phi_entropy(f, e)?),
        Variant::Operator => EntropyValue::Matrix(operator_phi_entropy(f, e)?),
    })
}

/// `E(Z − EZ)²`.
pub fn variance(e: &MatrixEnsemble) -> HermitianMatrix {
    let mean = e.expectation();
    let centered: Vec<HermitianMatrix> = e.atoms().iter().map(|a| (a - &mean).square()).collect();
    weighted_sum(e.weights().iter().copied().zip(centered.iter()))
}

/// `1 + max |Φ(λ)|` over the spectra of the given matrices: the magnitude
/// against which entropy inequalities are judged.
pub(crate) fn phi_scale<'a>(f: &ScalarFunction, mats: impl IntoIterator<Item = &'a HermitianMatrix>) -> f64 {
    let mut m: f64 = 0.0;
    for a in mats {
        for l in crate::linalg::eigenvalues(a) {
            let v = f.value(l.max(0.0));
            if v.is_finite() {
                m = m.max(v.abs());
            }
        }
    }
    1.0 + m
}

/// Entropy of the slice ensemble obtained by fixing `fixed`: the values of
/// `X₋ᵢ` when integrating over factor `i`, or the single value of `Xᵢ` when
/// integrating over the complement.
pub fn conditional_entropy(
    f: &ScalarFunction,
    p: &ProductEnsemble,
    i: usize,
    fixed: &[usize],
    variant: Variant,
    over: IntegrateOver,
) -> Result<EntropyValue> {
    let slice = match over {
        IntegrateOver::FactorI => p.slice_factor(i, fixed)?,
        IntegrateOver::Complement => {
            if fixed.len() != 1 {
                return Err(Error::InvalidParameter(format!(
                    "complement conditioning fixes one coordinate, got {}",
                    fixed.len()
                )));
            }
            p.slice_complement(i, fixed[0])?
        }
    };
    phi_entropy(f, &slice, variant)
}

/// `E[H⁽ⁱ⁾(Z)]`: conditional entropy averaged over the held-fixed coordinates.
pub fn expected_conditional_entropy(
    f: &ScalarFunction,
    p: &ProductEnsemble,
    i: usize,
    over: IntegrateOver,
) -> Result<HermitianMatrix> {
    let slices = p.conditional_slices(i, over)?;
    let values = slices
        .iter()
        .map(|(s, _)| operator_phi_entropy(f, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_sum(slices.iter().map(|(_, w)| *w).zip(values.iter())))
}

fn class_gate(f: &ScalarFunction, tag: ClassTag, allow_outside_class: bool) -> Result<()> {
    if allow_outside_class || f.has_tag(tag) {
        Ok(())
    } else {
        Err(Error::ClassGate {
            function: f.name(),
            required: format!("{tag:?}"),
        })
    }
}

/// `H(Z) ≤ Σᵢ E[H⁽ⁱ⁾(Z)]` (scalar for the trace variant, Löwner for the
/// operator variant). Refuses functions without the variant's class tag
/// unless `allow_outside_class` is set.
pub fn check_subadditivity(
    f: &ScalarFunction,
    p: &ProductEnsemble,
    variant: Variant,
    allow_outside_class: bool,
) -> Result<VerificationReport> {
    class_gate(f, variant.required_class(), allow_outside_class)?;
    let joint = p.joint();
    let total = operator_phi_entropy(f, &joint)?;
    let parts = (0..p.n_factors())
        .map(|i| expected_conditional_entropy(f, p, i, IntegrateOver::FactorI))
        .collect::<Result<Vec<_>>>()?;
    let sum = weighted_sum(parts.iter().map(|m| (1.0, m)));
    let diff = &sum - &total;
    let tol = ENTROPY_REL_TOL * phi_scale(f, p.images());
    let name = format!("subadditivity/{variant}");
    let report = match variant {
        Variant::Trace => VerificationReport::from_margin(name, normalized_trace(&diff), tol),
        Variant::Operator => {
            let v = psd_verdict(&diff, tol);
            let r = VerificationReport::from_margin(name, v.min_eigenvalue, tol);
            if r.holds {
                r
            } else {
                r.with_witness(json!({ "product": p, "direction": v.witness_vector }))
            }
        }
    };
    Ok(if report.holds || report.witness.is_some() {
        report
    } else {
        report.with_witness(json!({ "product": p }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e0() -> MatrixEnsemble {
        MatrixEnsemble::new(vec![(0.5, HermitianMatrix::diag(&[1.0, 2.0])), (0.5, HermitianMatrix::diag(&[3.0, 4.0]))])
            .unwrap()
    }

    fn scalar_entropy(f: &ScalarFunction, xs: &[(f64, f64)]) -> f64 {
        let mean: f64 = xs.iter().map(|(w, x)| w * x).sum();
        xs.iter().map(|(w, x)| w * f.value(*x)).sum::<f64>() - f.value(mean)
    }

    #[test]
    fn entropy_examples() {
        let sq = ScalarFunction::square();
        assert!((matrix_phi_entropy(&sq, &e0()).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(operator_phi_entropy(&sq, &e0()).unwrap(), HermitianMatrix::diag(&[1.0, 1.0]));
        let e = MatrixEnsemble::new(vec![(0.5, HermitianMatrix::diag(&[1.0, 1.0])), (0.5, HermitianMatrix::diag(&[3.0, 1.0]))])
            .unwrap();
        let want = (1.5 * 3f64.ln() - 2.0 * 2f64.ln()) / 2.0;
        let got = matrix_phi_entropy(&ScalarFunction::xlogx(), &e).unwrap();
        assert!((got - want).abs() < 1e-14 && (got - 0.13081).abs() < 1e-5);
        let det = MatrixEnsemble::deterministic(HermitianMatrix::diag(&[0.5, 2.0])).unwrap();
        assert_eq!(matrix_phi_entropy(&ScalarFunction::xlogx(), &det).unwrap(), 0.0);
        assert_eq!(operator_phi_entropy(&sq, &det).unwrap().max_abs_entry(), 0.0);
    }

    #[test]
    fn variance_matches_square_entropy() {
        assert!((&variance(&e0()) - &operator_phi_entropy(&ScalarFunction::square(), &e0()).unwrap()).max_abs_entry() < 1e-12);
    }

    #[test]
    fn scalar_reduction() {
        let xs = [(0.2, 0.5), (0.3, 1.5), (0.5, 3.0)];
        let e = MatrixEnsemble::new(xs.iter().map(|(w, x)| (*w, HermitianMatrix::diag(&[*x]))).collect()).unwrap();
        for f in [ScalarFunction::xlogx(), ScalarFunction::square(), ScalarFunction::power(1.3).unwrap()] {
            let got = matrix_phi_entropy(&f, &e).unwrap();
            assert!((got - scalar_entropy(&f, &xs)).abs() < 1e-12, "{f}");
        }
    }

    #[test]
    fn conditional_examples() {
        let p = ProductEnsemble::from_fn(vec![vec![0.3, 0.7], vec![1.0]], |t| HermitianMatrix::diag(&[1.0 + t[0] as f64, 2.0])).unwrap();
        let f = ScalarFunction::xlogx();
        // factor 1 is deterministic
        let h = conditional_entropy(&f, &p, 1, &[1], Variant::Trace, IntegrateOver::FactorI).unwrap();
        assert_eq!(h.as_scalar(), Some(0.0));
        let single = ProductEnsemble::from_fn(vec![vec![0.4, 0.6]], |t| HermitianMatrix::diag(&[1.0 + 2.0 * t[0] as f64])).unwrap();
        let h = conditional_entropy(&f, &single, 0, &[], Variant::Trace, IntegrateOver::FactorI).unwrap();
        assert_eq!(h.as_scalar().unwrap(), matrix_phi_entropy(&f, &single.joint()).unwrap());
    }

    #[test]
    fn conditional_square_is_entrywise_variance() {
        let vals = |t: &[usize]| [1.0 + t[0] as f64 + 2.0 * t[1] as f64, 0.5 + (t[0] * t[1]) as f64];
        let p = ProductEnsemble::from_fn(vec![vec![0.25, 0.75], vec![0.6, 0.4]], |t| HermitianMatrix::diag(&vals(t))).unwrap();
        let sq = ScalarFunction::square();
        for rest in 0..2 {
            let h = conditional_entropy(&sq, &p, 0, &[rest], Variant::Operator, IntegrateOver::FactorI).unwrap();
            let m = h.as_matrix().unwrap();
            for k in 0..2 {
                let xs: Vec<(f64, f64)> = (0..2).map(|x0| ([0.25, 0.75][x0], vals(&[x0, rest])[k])).collect();
                assert!((m.as_matrix()[(k, k)].re - scalar_entropy(&sq, &xs)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subadditivity_gate_and_single_factor() {
        let p = ProductEnsemble::from_fn(vec![vec![0.5, 0.5]], |t| HermitianMatrix::diag(&[1.0 + t[0] as f64, 2.0])).unwrap();
        for v in [Variant::Trace, Variant::Operator] {
            let r = check_subadditivity(&ScalarFunction::square(), &p, v, false).unwrap();
            assert!(r.holds && r.margin == 0.0, "{r:?}");
        }
        assert!(matches!(
            check_subadditivity(&ScalarFunction::xlogx(), &p, Variant::Operator, false),
            Err(Error::ClassGate { .. })
        ));
        assert!(check_subadditivity(&ScalarFunction::quartic(), &p, Variant::Trace, true).is_ok());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("operator".parse::<Variant>().unwrap(), Variant::Operator);
        assert!("both".parse::<Variant>().is_err());
    }
}
