//! Unital completely positive maps `N(A) = Σ Kᵢ A Kᵢ†`, entropy
//! monotonicity under them, and the operator Jensen inequality.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::entropy::{operator_phi_entropy, phi_scale, MatrixEnsemble, Variant, ENTROPY_REL_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    apply_scalar_function, c, eigenvalues, max_abs_entry, normalized_trace, psd_verdict, trace, CMatrix,
    HermitianMatrix, MatrixJson,
};
use crate::phi::{ClassTag, ScalarFunction};
use crate::report::VerificationReport;
use crate::sampling::{haar_unitary, random_weights, sample_ensemble, trial_rng};
use crate::trials::{run_trials, TrialConfig};

/// Slack on `Σ KᵢKᵢ† = I` and `Σ Kᵢ†Kᵢ = I`.
pub const UNITAL_TOL: f64 = 1e-10;

/// A channel in Kraus form, unital by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<CMatrix>,
    trace_preserving: bool,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    dim: usize,
    kraus: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    trace_preserving: bool,
}

impl TryFrom<ChannelJson> for KrausChannel {
    type Error = Error;
    fn try_from(j: ChannelJson) -> Result<Self> {
        let kraus = j.kraus.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        if kraus.iter().any(|k| k.nrows() != j.dim) {
            return Err(Error::InvalidChannel(format!("Kraus operators must be {0}x{0}", j.dim)));
        }
        Self::new(kraus, j.trace_preserving)
    }
}

impl From<KrausChannel> for ChannelJson {
    fn from(ch: KrausChannel) -> Self {
        Self {
            dim: ch.dim,
            kraus: ch.kraus.iter().map(MatrixJson::from_matrix).collect(),
            trace_preserving: ch.trace_preserving,
        }
    }
}

fn identity_defect(sum: &CMatrix) -> f64 {
    let d = sum.nrows();
    max_abs_entry(&(sum - CMatrix::identity(d, d)))
}

impl KrausChannel {
    /// Validates unitality, and trace preservation when `trace_preserving` is set.
    pub fn new(kraus: Vec<CMatrix>, trace_preserving: bool) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let dim = first.nrows();
        if dim == 0 || kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::InvalidChannel("Kraus operators must be non-empty square matrices of one size".into()));
        }
        let zero = CMatrix::zeros(dim, dim);
        let unital = identity_defect(&kraus.iter().fold(zero.clone(), |acc, k| acc + k * k.adjoint()));
        if unital > UNITAL_TOL {
            return Err(Error::InvalidChannel(format!("not unital: |Σ KK† − I| = {unital:e}")));
        }
        if trace_preserving {
            let tp = identity_defect(&kraus.iter().fold(zero, |acc, k| acc + k.adjoint() * k));
            if tp > UNITAL_TOL {
                return Err(Error::InvalidChannel(format!("not trace preserving: |Σ K†K − I| = {tp:e}")));
            }
        }
        Ok(Self {
            dim,
            kraus,
            trace_preserving,
        })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(vec![CMatrix::identity(d, d)], true)
    }

    /// `A ↦ U A U†`.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u], true)
    }

    /// `A ↦ Σ pᵢ Uᵢ A Uᵢ†`.
    pub fn mixed_unitary(weights: &[f64], unitaries: Vec<CMatrix>) -> Result<Self> {
        if weights.len() != unitaries.len() || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidChannel("need one non-negative weight per unitary".into()));
        }
        let kraus = weights.iter().zip(unitaries).map(|(&w, u)| u * c(w.sqrt())).collect();
        Self::new(kraus, true)
    }

    /// Kills off-diagonal entries in the computational basis.
    pub fn dephasing(d: usize) -> Result<Self> {
        let kraus = (0..d)
            .map(|i| {
                let mut p = CMatrix::zeros(d, d);
                p[(i, i)] = c(1.0);
                p
            })
            .collect();
        Self::new(kraus, true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }
}

/// `N(A) = Σ Kᵢ A Kᵢ†`.
pub fn apply_channel(n: &KrausChannel, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    if a.dim() != n.dim {
        return Err(Error::DimensionMismatch {
            expected: n.dim,
            got: a.dim(),
        });
    }
    let m = a.as_matrix();
    let out = n.kraus.iter().fold(CMatrix::zeros(n.dim, n.dim), |acc, k| acc + k * m * k.adjoint());
    Ok(HermitianMatrix::from_matrix_unchecked(out))
}

/// Mixed-unitary channel with `k` Haar unitaries and Dirichlet weights.
pub fn sample_unital_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Result<KrausChannel> {
    if k == 0 {
        return Err(Error::InvalidParameter("a channel needs at least one Kraus operator".into()));
    }
    let w = random_weights(rng, k);
    let us = (0..k).map(|_| haar_unitary(rng, d)).collect();
    KrausChannel::mixed_unitary(&w, us)
}

/// Seeded [`sample_unital_channel`].
pub fn random_unital_channel(d: usize, k: usize, seed: u64) -> Result<KrausChannel> {
    sample_unital_channel(&mut trial_rng(seed, "random_unital_channel", 0), d, k)
}

fn push_forward(n: &KrausChannel, e: &MatrixEnsemble) -> Result<MatrixEnsemble> {
    if e.dim() != n.dim {
        return Err(Error::DimensionMismatch {
            expected: n.dim,
            got: e.dim(),
        });
    }
    e.map(|a| apply_channel(n, a).expect("dimensions checked"))
}

fn gate(f: &ScalarFunction, tag: ClassTag, allow: bool) -> Result<()> {
    crate::characterizations::class_gate(f, tag, allow)
}

/// `H(N(Z)) ≤ H(Z)` for the pushforward ensemble `{(wᵢ, N(Aᵢ))}`; the
/// operator variant compares in Löwner order.
pub fn check_monotonicity(
    f: &ScalarFunction,
    n: &KrausChannel,
    e: &MatrixEnsemble,
    variant: Variant,
    allow_outside_class: bool,
) -> Result<VerificationReport> {
    gate(f, variant.required_class(), allow_outside_class)?;
    let pushed = push_forward(n, e)?;
    let before = operator_phi_entropy(f, e)?;
    let after = operator_phi_entropy(f, &pushed)?;
    let diff = &before - &after;
    let tol = ENTROPY_REL_TOL * phi_scale(f, e.atoms().iter().chain(pushed.atoms()));
    let name = format!("monotonicity/{variant}/{f}");
    let r = match variant {
        Variant::Trace => VerificationReport::from_margin(name, normalized_trace(&diff), tol),
        Variant::Operator => VerificationReport::from_margin(name, psd_verdict(&diff, tol).min_eigenvalue, tol),
    };
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "channel": n, "ensemble": e }))
    })
}

/// `H(N(Z)) ⪯ N(H(Z))` in Löwner order: the covariant form of operator
/// monotonicity, reported alongside [`check_monotonicity`] as a diagnostic.
pub fn check_covariant_monotonicity(
    f: &ScalarFunction,
    n: &KrausChannel,
    e: &MatrixEnsemble,
    allow_outside_class: bool,
) -> Result<VerificationReport> {
    gate(f, ClassTag::C3, allow_outside_class)?;
    let pushed = push_forward(n, e)?;
    let mapped = apply_channel(n, &operator_phi_entropy(f, e)?)?;
    let after = operator_phi_entropy(f, &pushed)?;
    let tol = ENTROPY_REL_TOL * phi_scale(f, e.atoms().iter().chain(pushed.atoms()));
    let r = VerificationReport::from_margin(
        format!("covariant_monotonicity/{f}"),
        psd_verdict(&(&mapped - &after), tol).min_eigenvalue,
        tol,
    );
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "channel": n, "ensemble": e }))
    })
}

/// [`check_monotonicity`] over random mixed-unitary channels with
/// `kraus_count` terms and random ensembles with `atoms` atoms.
pub fn monotonicity_sweep(
    f: &ScalarFunction,
    cfg: &TrialConfig,
    variant: Variant,
    kraus_count: usize,
    atoms: usize,
) -> Result<VerificationReport> {
    gate(f, variant.required_class(), cfg.allow_outside_class)?;
    let (lo, hi) = cfg.spectrum;
    run_trials(&format!("monotonicity/{variant}/{f}"), cfg, |rng, _| {
        let n = sample_unital_channel(rng, cfg.dim, kraus_count)?;
        let e = sample_ensemble(rng, cfg.dim, atoms, lo, hi)?;
        check_monotonicity(f, &n, &e, variant, true)
    })
}

/// Like [`monotonicity_sweep`] for [`check_covariant_monotonicity`].
pub fn covariant_monotonicity_sweep(
    f: &ScalarFunction,
    cfg: &TrialConfig,
    kraus_count: usize,
    atoms: usize,
) -> Result<VerificationReport> {
    gate(f, ClassTag::C3, cfg.allow_outside_class)?;
    let (lo, hi) = cfg.spectrum;
    run_trials(&format!("covariant_monotonicity/{f}"), cfg, |rng, _| {
        let n = sample_unital_channel(rng, cfg.dim, kraus_count)?;
        let e = sample_ensemble(rng, cfg.dim, atoms, lo, hi)?;
        check_covariant_monotonicity(f, &n, &e, true)
    })
}

/// `f(N(A)) ⪯ N(f(A))`: Löwner margin for operator-convex `f`, otherwise
/// the trace margin `Tr N(f(A)) − Tr f(N(A))`.
pub fn operator_jensen_check(f: &ScalarFunction, n: &KrausChannel, a: &HermitianMatrix) -> Result<VerificationReport> {
    let fa = apply_scalar_function(f, a)?;
    let na = apply_channel(n, a)?;
    let (lo, hi) = (a.min_eigenvalue(), a.max_eigenvalue());
    let slack = 1e-10 * (1.0 + lo.abs().max(hi.abs()));
    if let Some(&bad) = eigenvalues(&na).iter().find(|&&l| l < lo - slack || l > hi + slack) {
        return Err(Error::InvalidChannel(format!(
            "spectrum of N(A) leaves [{lo}, {hi}] at {bad}; the channel is not unital"
        )));
    }
    let lhs = apply_scalar_function(f, &na)?;
    let rhs = apply_channel(n, &fa)?;
    let diff = &rhs - &lhs;
    let tol = ENTROPY_REL_TOL * phi_scale(f, [a, &na]);
    let r = if f.has_tag(ClassTag::OperatorConvex) {
        let v = psd_verdict(&diff, tol);
        VerificationReport::from_margin(format!("operator_jensen/loewner/{f}"), v.min_eigenvalue, tol)
    } else {
        VerificationReport::from_margin(format!("operator_jensen/trace/{f}"), trace(&diff), tol * a.dim() as f64)
    };
    Ok(if r.holds {
        r
    } else {
        r.with_witness(json!({ "channel": n, "a": a }))
    })
}

/// [`operator_jensen_check`] on random channels and matrices with spectrum in the configured window.
pub fn operator_jensen_sweep(f: &ScalarFunction, cfg: &TrialConfig, kraus_count: usize) -> Result<VerificationReport> {
    let (lo, hi) = cfg.spectrum;
    let kind = if f.has_tag(ClassTag::OperatorConvex) { "loewner" } else { "trace" };
    run_trials(&format!("operator_jensen/{kind}/{f}"), cfg, |rng, _| {
        let n = sample_unital_channel(rng, cfg.dim, kraus_count)?;
        let a = crate::sampling::sample_spectrum_in(rng, cfg.dim, lo, hi);
        operator_jensen_check(f, &n, &a)
    })
}
