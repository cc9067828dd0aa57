//! Numerical certification of the convexity characterizations of the
//! entropy classes.
//!
//! The bivariate functionals use the unnormalized trace `Tr`. Randomized
//! checks only ever corroborate or falsify: a passing report means "no
//! violation in N seeded trials".

mod conditions;
mod lemmas;
mod relations;

pub use conditions::{
    condition_a_at, condition_a_check, condition_e_check, condition_e_sides, condition_e_sweep, CONDITION_A_REL_TOL, CONDITION_E_REL_TOL};
pub use lemmas::{
    conditional_jensen_check, conditional_jensen_sweep, convexity_lemma_check, convexity_lemma_sweep,
    entropy_convexity_check, entropy_convexity_sweep, PairEnsemble,
};
pub use relations::{integral_relation_check, integral_relation_sweep, taylor_relation_check, RELATION_TOL};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::entropy::{EntropyValue, Variant};
use crate::error::{Error, Result};
use crate::frechet::{frechet_d1, frechet_d2};
use crate::linalg::{apply_scalar_function, psd_verdict, trace, HermitianMatrix};
use crate::phi::{ClassTag, ScalarFunction};
use crate::report::VerificationReport;
use crate::sampling::sample_spectrum_in;
use crate::trials::{run_trials, TrialConfig};

/// Default convex-combination weights; each trial adds two random ones.
pub const DEFAULT_LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];
/// Relative slack of the sampled convexity inequalities.
pub const CONVEXITY_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    /// `Φ(u+v) − Φ(u) − DΦ[u](v)`
    BregmanA,
    /// `DΦ[u+v](v) − DΦ[u](v)`
    MapB,
    /// `D²Φ[u](v, v)`
    MapC,
    /// `tΦ(u) + (1−t)Φ(v) − Φ(tu + (1−t)v)`
    GapFt,
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionalKind::BregmanA => "bregman_A",
            FunctionalKind::MapB => "map_B",
            FunctionalKind::MapC => "map_C",
            FunctionalKind::GapFt => "gap_F_t",
        })
    }
}

impl FromStr for FunctionalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bregman_A" | "b" => Ok(FunctionalKind::BregmanA),
            "map_B" | "c" => Ok(FunctionalKind::MapB),
            "map_C" | "d" => Ok(FunctionalKind::MapC),
            "gap_F_t" | "f" => Ok(FunctionalKind::GapFt),
            other => Err(Error::InvalidParameter(format!("unknown functional `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BivariateFunctional {
    pub kind: FunctionalKind,
    pub phi: ScalarFunction,
    pub t: Option<f64>,
    pub variant: Variant,
}

impl BivariateFunctional {
    pub fn new(kind: FunctionalKind, phi: ScalarFunction, t: Option<f64>, variant: Variant) -> Result<Self> {
        match (kind, t) {
            (FunctionalKind::GapFt, Some(t)) if (0.0..=1.0).contains(&t) => {}
            (FunctionalKind::GapFt, _) => {
                return Err(Error::InvalidParameter("gap_F_t needs t in [0, 1]".into()));
            }
            (_, Some(_)) => {
                return Err(Error::InvalidParameter(format!("{kind} takes no t parameter")));
            }
            _ => {}
        }
        Ok(Self { kind, phi, t, variant })
    }

    pub fn name(&self) -> String {
        match self.t {
            Some(t) => format!("{}({t})/{}", self.kind, self.variant),
            None => format!("{}/{}", self.kind, self.variant),
        }
    }
}

fn wrap(m: HermitianMatrix, variant: Variant) -> EntropyValue {
    match variant {
        Variant::Trace => EntropyValue::Scalar(trace(&m)),
        Variant::Operator => EntropyValue::Matrix(m),
    }
}

/// Matrix value of the functional before any trace is taken.
pub(crate) fn functional_matrix(
    kind: FunctionalKind,
    phi: &ScalarFunction,
    t: Option<f64>,
    u: &HermitianMatrix,
    v: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    u.check_dim(v)?;
    match kind {
        FunctionalKind::BregmanA => {
            let w = u + v;
            let lhs = apply_scalar_function(phi, &w)?;
            let rhs = &apply_scalar_function(phi, u)? + &frechet_d1(phi, u, v)?;
            Ok(&lhs - &rhs)
        }
        FunctionalKind::MapB => Ok(&frechet_d1(phi, &(u + v), v)? - &frechet_d1(phi, u, v)?),
        FunctionalKind::MapC => frechet_d2(phi, u, v, v),
        FunctionalKind::GapFt => {
            let t = t.unwrap_or(0.5);
            let mix = &u.scale(t) + &v.scale(1.0 - t);
            let ends = &apply_scalar_function(phi, u)?.scale(t) + &apply_scalar_function(phi, v)?.scale(1.0 - t);
            Ok(&ends - &apply_scalar_function(phi, &mix)?)
        }
    }
}

pub fn eval_functional(f: &BivariateFunctional, u: &HermitianMatrix, v: &HermitianMatrix) -> Result<EntropyValue> {
    Ok(wrap(functional_matrix(f.kind, &f.phi, f.t, u, v)?, f.variant))
}

pub(crate) fn class_gate(f: &ScalarFunction, tag: ClassTag, allow: bool) -> Result<()> {
    if allow || f.has_tag(tag) {
        Ok(())
    } else {
        Err(Error::ClassGate {
            function: f.name(),
            required: format!("{tag:?}"),
        })
    }
}

fn magnitude(v: &EntropyValue) -> f64 {
    match v {
        EntropyValue::Scalar(x) => x.abs(),
        EntropyValue::Matrix(m) => m.spectral_norm(),
    }
}

/// Slack of `λF₁ + (1−λ)F₂ − F_λ` in the variant's order.
fn convex_slack(
    f1: &EntropyValue,
    f2: &EntropyValue,
    fl: &EntropyValue,
    lambda: f64,
    tol: f64,
) -> (f64, Option<Vec<num_complex::Complex64>>) {
    match (f1, f2, fl) {
        (EntropyValue::Scalar(a), EntropyValue::Scalar(b), EntropyValue::Scalar(c)) => {
            (lambda * a + (1.0 - lambda) * b - c, None)
        }
        (EntropyValue::Matrix(a), EntropyValue::Matrix(b), EntropyValue::Matrix(c)) => {
            let diff = &(&a.scale(lambda) + &b.scale(1.0 - lambda)) - c;
            let v = psd_verdict(&diff, tol);
            (v.min_eigenvalue, v.witness_vector)
        }
        _ => unreachable!("mixed variants"),
    }
}

fn convexity_report(
    f1: &EntropyValue,
    f2: &EntropyValue,
    fl: &EntropyValue,
    lambda: f64,
) -> (VerificationReport, Option<Vec<num_complex::Complex64>>) {
    let tol = CONVEXITY_REL_TOL * (1.0 + magnitude(f1) + magnitude(f2) + magnitude(fl));
    let (slack, dir) = convex_slack(f1, f2, fl, lambda, tol);
    (VerificationReport::from_margin("", slack, tol), dir)
}

/// Convexity slack of `F` at one pair of points and one weight `λ`.
pub fn convexity_at(
    f: &BivariateFunctional,
    (u1, v1): (&HermitianMatrix, &HermitianMatrix),
    (u2, v2): (&HermitianMatrix, &HermitianMatrix),
    lambda: f64,
) -> Result<VerificationReport> {
    let f1 = eval_functional(f, u1, v1)?;
    let f2 = eval_functional(f, u2, v2)?;
    let ul = &u1.scale(lambda) + &u2.scale(1.0 - lambda);
    let vl = &v1.scale(lambda) + &v2.scale(1.0 - lambda);
    let fl = eval_functional(f, &ul, &vl)?;
    Ok(convexity_report(&f1, &f2, &fl, lambda).0)
}

/// Draws `(u, v)` for a functional: `u` and `u + v` (or `u` and `v` for
/// `F_t`) have spectra in the configured window.
pub(crate) fn sample_pair<R: Rng + ?Sized>(
    rng: &mut R,
    kind: FunctionalKind,
    cfg: &TrialConfig,
) -> (HermitianMatrix, HermitianMatrix) {
    let (lo, hi) = cfg.spectrum;
    let u = sample_spectrum_in(rng, cfg.dim, lo, hi);
    let w = sample_spectrum_in(rng, cfg.dim, lo, hi);
    match kind {
        FunctionalKind::GapFt => (u, w),
        _ => {
            let v = &w - &u;
            (u, v)
        }
    }
}

/// Joint convexity of `(u, v) ↦ F(u, v)` on sampled pairs, over
/// `lambdas` plus two random weights per trial.
pub fn joint_convexity_test(f: &BivariateFunctional, cfg: &TrialConfig, lambdas: &[f64]) -> Result<VerificationReport> {
    class_gate(&f.phi, f.variant.required_class(), cfg.allow_outside_class)?;
    let check = format!("joint_convexity/{}/{}", f.phi, f.name());
    run_trials(&check, cfg, |rng, _| {
        let (u1, v1) = sample_pair(rng, f.kind, cfg);
        let (u2, v2) = sample_pair(rng, f.kind, cfg);
        let mut ls = lambdas.to_vec();
        ls.push(rng.random_range(0.0..1.0));
        ls.push(rng.random_range(0.0..1.0));
        let f1 = eval_functional(f, &u1, &v1)?;
        let f2 = eval_functional(f, &u2, &v2)?;
        let mut worst: Option<VerificationReport> = None;
        for &l in &ls {
            let ul = &u1.scale(l) + &u2.scale(1.0 - l);
            let vl = &v1.scale(l) + &v2.scale(1.0 - l);
            let fl = eval_functional(f, &ul, &vl)?;
            let (mut r, dir) = convexity_report(&f1, &f2, &fl, l);
            if !r.holds {
                r = r.with_witness(json!({
                    "lambda": l, "u1": u1, "v1": v1, "u2": u2, "v2": v2, "direction": dir
                }));
            }
            if worst.as_ref().is_none_or(|w| r.normalized_margin() < w.normalized_margin()) {
                worst = Some(r);
            }
        }
        Ok(worst.unwrap())
    })
}
