use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::entropy::{
    expected_conditional_entropy, operator_phi_entropy, phi_scale, IntegrateOver, MatrixEnsemble, ProductEnsemble,
    Variant, ENTROPY_REL_TOL, WEIGHT_SUM_TOL,
};
use crate::error::{Error, Result};
use crate::frechet::frechet_d1;
use crate::linalg::{hs_inner, normalized_trace, psd_verdict, weighted_sum, HermitianMatrix};
use crate::phi::ScalarFunction;
use crate::report::VerificationReport;
use crate::sampling::{random_weights, sample_coupled, sample_direction, sample_ensemble, sample_product, sample_spectrum_in};
use crate::trials::{run_trials, TrialConfig};

use super::{class_gate, CONVEXITY_REL_TOL, DEFAULT_LAMBDAS};

/// Finitely supported random pair `(A, X)`: `A` positive definite, `X` Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEnsemble {
    pub weights: Vec<f64>,
    pub a: Vec<HermitianMatrix>,
    pub x: Vec<HermitianMatrix>,
}

impl PairEnsemble {
    pub fn new(weights: Vec<f64>, a: Vec<HermitianMatrix>, x: Vec<HermitianMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != a.len() || a.len() != x.len() {
            return Err(Error::InvalidEnsemble("pair ensemble needs matching non-empty lists".into()));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_SUM_TOL || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidEnsemble("pair weights must be a probability vector".into()));
        }
        let d = a[0].dim();
        for (ak, xk) in a.iter().zip(&x) {
            if ak.dim() != d || xk.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: ak.dim().max(xk.dim()),
                });
            }
            if !(ak.min_eigenvalue() > 0.0) {
                return Err(Error::InvalidEnsemble("A atoms must be positive definite".into()));
            }
        }
        Ok(Self { weights, a, x })
    }
}

/// `⟨X, DΨ[A](X)⟩`.
fn psi_form(f: &ScalarFunction, a: &HermitianMatrix, x: &HermitianMatrix) -> Result<f64> {
    Ok(hs_inner(x, &frechet_d1(&f.derivative(), a, x)?).re)
}

/// `E⟨X, DΨ[A](X)⟩ ≥ ⟨EX, DΨ[EA](EX)⟩`.
pub fn convexity_lemma_check(f: &ScalarFunction, pairs: &PairEnsemble) -> Result<VerificationReport> {
    let mut lhs = 0.0;
    for ((w, a), x) in pairs.weights.iter().zip(&pairs.a).zip(&pairs.x) {
        lhs += w * psi_form(f, a, x)?;
    }
    let ea = weighted_sum(pairs.weights.iter().copied().zip(pairs.a.iter()));
    let ex = weighted_sum(pairs.weights.iter().copied().zip(pairs.x.iter()));
    let rhs = psi_form(f, &ea, &ex)?;
    let tol = CONVEXITY_REL_TOL * (1.0 + lhs.abs() + rhs.abs());
    let r = VerificationReport::from_margin(format!("convexity_lemma/{f}"), lhs - rhs, tol);
    Ok(if r.holds { r } else { r.with_witness(json!({ "pairs": pairs })) })
}

pub fn convexity_lemma_sweep(f: &ScalarFunction, cfg: &TrialConfig, atoms: usize) -> Result<VerificationReport> {
    class_gate(f, crate::phi::ClassTag::C2, cfg.allow_outside_class)?;
    let (lo, hi) = cfg.spectrum;
    run_trials(&format!("convexity_lemma/{f}"), cfg, |rng, _| {
        let w = random_weights(rng, atoms);
        let a = (0..atoms).map(|_| sample_spectrum_in(rng, cfg.dim, lo, hi)).collect();
        let x = (0..atoms).map(|_| sample_direction(rng, cfg.dim)).collect();
        convexity_lemma_check(f, &PairEnsemble::new(w, a, x)?)
    })
}

fn judge(name: String, diff: &HermitianMatrix, variant: Variant, tol: f64) -> (VerificationReport, Option<serde_json::Value>) {
    match variant {
        Variant::Trace => (VerificationReport::from_margin(name, normalized_trace(diff), tol), None),
        Variant::Operator => {
            let v = psd_verdict(diff, tol);
            (VerificationReport::from_margin(name, v.min_eigenvalue, tol), v.witness_vector.map(|w| json!(w)))
        }
    }
}

/// `H_Φ(E₁Z) ⪯ E₁ H_Φ(Z | X₁)` for a two-factor ensemble, where `E₁`
/// averages over `X₁` and `H_Φ(· | X₁)` is the entropy over `X₂`.
pub fn conditional_jensen_check(f: &ScalarFunction, p: &ProductEnsemble, variant: Variant) -> Result<VerificationReport> {
    if p.n_factors() != 2 {
        return Err(Error::InvalidParameter(format!(
            "conditional Jensen needs two factors, got {}",
            p.n_factors()
        )));
    }
    let lhs = expected_conditional_entropy(f, p, 1, IntegrateOver::FactorI)?;
    let averaged = p.conditional_expectation(0)?;
    let e1z = MatrixEnsemble::new(p.factors()[1].iter().copied().zip(averaged).collect())?;
    let rhs = operator_phi_entropy(f, &e1z)?;
    let tol = ENTROPY_REL_TOL * phi_scale(f, p.images());
    let (r, dir) = judge(format!("conditional_jensen/{variant}"), &(&lhs - &rhs), variant, tol);
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "product": p, "direction": dir }))
    })
}

pub fn conditional_jensen_sweep(
    f: &ScalarFunction,
    cfg: &TrialConfig,
    variant: Variant,
    sizes: [usize; 2],
) -> Result<VerificationReport> {
    class_gate(f, variant.required_class(), cfg.allow_outside_class)?;
    let (lo, hi) = cfg.spectrum;
    run_trials(&format!("conditional_jensen/{f}/{variant}"), cfg, |rng, _| {
        let p = sample_product(rng, cfg.dim, &sizes, lo, hi)?;
        conditional_jensen_check(f, &p, variant)
    })
}

fn mixture(z1: &MatrixEnsemble, z2: &MatrixEnsemble, l: f64) -> Result<MatrixEnsemble> {
    MatrixEnsemble::new(
        z1.iter()
            .zip(z2.atoms())
            .map(|((w, a), b)| (w, &a.scale(l) + &b.scale(1.0 - l)))
            .collect(),
    )
}

/// Convexity of `Z ↦ H_Φ(Z)` along `λZ₁ + (1−λ)Z₂` for coupled ensembles.
pub fn entropy_convexity_check(
    f: &ScalarFunction,
    z1: &MatrixEnsemble,
    z2: &MatrixEnsemble,
    lambdas: &[f64],
    variant: Variant,
) -> Result<VerificationReport> {
    if !z1.is_coupled_with(z2) {
        return Err(Error::InvalidEnsemble("ensembles must share dimension and weights".into()));
    }
    let h1 = operator_phi_entropy(f, z1)?;
    let h2 = operator_phi_entropy(f, z2)?;
    let tol = ENTROPY_REL_TOL * phi_scale(f, z1.atoms().iter().chain(z2.atoms()));
    let name = format!("entropy_convexity/{variant}");
    let mut worst: Option<VerificationReport> = None;
    for &l in lambdas {
        let hl = operator_phi_entropy(f, &mixture(z1, z2, l)?)?;
        let diff = &(&h1.scale(l) + &h2.scale(1.0 - l)) - &hl;
        let (mut r, dir) = judge(name.clone(), &diff, variant, tol);
        if !r.holds {
            r = r.with_witness(json!({ "lambda": l, "z1": z1, "z2": z2, "direction": dir }));
        }
        if worst.as_ref().is_none_or(|w| r.margin < w.margin) {
            worst = Some(r);
        }
    }
    worst.ok_or_else(|| Error::InvalidParameter("no lambda values given".into()))
}

pub fn entropy_convexity_sweep(
    f: &ScalarFunction,
    cfg: &TrialConfig,
    variant: Variant,
    atoms: usize,
) -> Result<VerificationReport> {
    class_gate(f, variant.required_class(), cfg.allow_outside_class)?;
    let (lo, hi) = cfg.spectrum;
    run_trials(&format!("entropy_convexity/{f}/{variant}"), cfg, |rng, _| {
        let z1 = sample_ensemble(rng, cfg.dim, atoms, lo, hi)?;
        let z2 = sample_coupled(rng, &z1, lo, hi)?;
        let mut ls = DEFAULT_LAMBDAS.to_vec();
        ls.push(rng.random_range(0.0..1.0));
        ls.push(rng.random_range(0.0..1.0));
        entropy_convexity_check(f, &z1, &z2, &ls, variant)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trials: u64) -> TrialConfig {
        TrialConfig {
            trials,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn lemma_examples() {
        let a = HermitianMatrix::from_real_rows(&[vec![1.0, 0.2], vec![0.2, 2.0]]).unwrap();
        let x = HermitianMatrix::from_real_rows(&[vec![0.5, -1.0], vec![-1.0, 0.3]]).unwrap();
        let det = PairEnsemble::new(vec![1.0], vec![a.clone()], vec![x.clone()]).unwrap();
        assert_eq!(convexity_lemma_check(&ScalarFunction::xlogx(), &det).unwrap().margin, 0.0);
        let two = PairEnsemble::new(vec![0.5, 0.5], vec![a.clone(), a.scale(2.0)], vec![x.clone(), x.scale(-1.0)]).unwrap();
        let sq = convexity_lemma_check(&ScalarFunction::square(), &two).unwrap();
        // 2 E‖X‖² − 2‖EX‖² with EX = 0
        assert!((sq.margin - 2.0 * hs_inner(&x, &x).re).abs() < 1e-12);
        assert!(convexity_lemma_sweep(&ScalarFunction::xlogx(), &cfg(50), 3).unwrap().holds);
        assert!(PairEnsemble::new(vec![1.0], vec![HermitianMatrix::zeros(2)], vec![x]).is_err());
    }

    #[test]
    fn jensen_examples() {
        let f = ScalarFunction::square();
        let p = ProductEnsemble::from_fn(vec![vec![1.0], vec![0.3, 0.7]], |t| HermitianMatrix::diag(&[1.0 + t[1] as f64, 2.0])).unwrap();
        assert_eq!(conditional_jensen_check(&f, &p, Variant::Operator).unwrap().margin, 0.0);
        let q = ProductEnsemble::from_fn(vec![vec![0.3, 0.7], vec![1.0]], |t| HermitianMatrix::diag(&[1.0 + t[0] as f64, 2.0])).unwrap();
        let r = conditional_jensen_check(&f, &q, Variant::Trace).unwrap();
        assert_eq!(r.margin, 0.0);
        assert!(conditional_jensen_sweep(&f, &cfg(50), Variant::Operator, [2, 3]).unwrap().holds);
        assert!(conditional_jensen_sweep(&ScalarFunction::xlogx(), &cfg(50), Variant::Trace, [3, 2]).unwrap().holds);
        let three = ProductEnsemble::from_fn(vec![vec![1.0]; 3], |_| HermitianMatrix::identity(1)).unwrap();
        assert!(conditional_jensen_check(&f, &three, Variant::Trace).is_err());
    }

    #[test]
    fn entropy_is_convex_along_mixtures() {
        for f in [ScalarFunction::xlogx(), ScalarFunction::power(1.5).unwrap()] {
            assert!(entropy_convexity_sweep(&f, &cfg(40), Variant::Trace, 3).unwrap().holds);
        }
        assert!(entropy_convexity_sweep(&ScalarFunction::square(), &cfg(40), Variant::Operator, 3).unwrap().holds);
    }
}
