use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Verdict of one inequality or identity check.
///
/// `margin` is the slack of the inequality (or the negated error of an
/// identity); the check holds iff `margin >= -tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub holds: bool,
    pub margin: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Value>,
    pub trials: u64,
}

impl VerificationReport {
    pub fn from_margin(check_name: impl Into<String>, margin: f64, tolerance: f64) -> Self {
        Self {
            check_name: check_name.into(),
            holds: margin >= -tolerance,
            margin,
            tolerance,
            witness: None,
            trials: 1,
        }
    }

    /// Agreement check: holds iff `error <= tolerance`.
    pub fn from_error(check_name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self::from_margin(check_name, -error, tolerance)
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witness = Some(witness);
        self
    }

    /// Re-judges the report against a caller-supplied tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.holds = self.margin >= -tolerance;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    /// Slack in units of the tolerance; `< -1` means the check failed.
    pub fn normalized_margin(&self) -> f64 {
        if self.tolerance > 0.0 {
            self.margin / self.tolerance
        } else if self.margin >= 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Folds per-trial reports into one: the worst trial (by normalized
    /// margin) supplies margin, tolerance and witness (kept even when the
    /// merged report holds). Ties keep the earliest.
    pub fn merge_worst(check_name: impl Into<String>, reports: impl IntoIterator<Item = VerificationReport>) -> Self {
        let mut worst: Option<VerificationReport> = None;
        let mut trials = 0;
        for r in reports {
            trials += r.trials;
            let replace = match &worst {
                None => true,
                Some(w) => r.normalized_margin() < w.normalized_margin(),
            };
            if replace {
                worst = Some(r);
            }
        }
        let mut out = worst.unwrap_or_else(|| VerificationReport::from_margin("", 0.0, 0.0));
        out.check_name = check_name.into();
        out.trials = trials;
        out.holds = out.margin >= -out.tolerance;
        out
    }
}
