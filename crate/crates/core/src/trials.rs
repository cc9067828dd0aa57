use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::report::VerificationReport;
use crate::sampling::trial_rng;

/// Sampling parameters shared by the randomized checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    pub dim: usize,
    pub trials: u64,
    /// Index of the first trial; `first_trial = k, trials = 1` replays trial `k`.
    pub first_trial: u64,
    pub seed: u64,
    /// Eigenvalue window `[lo, hi]` of sampled matrices.
    pub spectrum: (f64, f64),
    /// Run class-gated checks on functions without the required tag.
    pub allow_outside_class: bool,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            trials: 100,
            first_trial: 0,
            seed: 0,
            spectrum: (0.5, 4.0),
            allow_outside_class: false,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.spectrum;
        if self.dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("invalid spectrum window [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn replay(&self, trial: u64) -> Self {
        Self {
            first_trial: trial,
            trials: 1,
            ..self.clone()
        }
    }
}

fn tag_witness(w: Option<Value>, check: &str, seed: u64, trial: u64) -> Value {
    let mut obj = json!({ "check": check, "seed": seed, "trial": trial });
    if let Some(inner) = w {
        obj["inputs"] = inner;
    }
    obj
}

/// Runs `body` once per trial (in parallel) and keeps the worst report.
/// Its witness is tagged `{check, seed, trial}`; replay the trial
/// with [`TrialConfig::replay`].
pub fn run_trials<F>(check: &str, cfg: &TrialConfig, body: F) -> Result<VerificationReport>
where
    F: Fn(&mut ChaCha8Rng, u64) -> Result<VerificationReport> + Sync,
{
    cfg.validate()?;
    let reports = (cfg.first_trial..cfg.first_trial + cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, check, t);
            let mut r = body(&mut rng, t)?;
            r.witness = Some(tag_witness(r.witness.take(), check, cfg.seed, t));
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::merge_worst(check, reports))
}
