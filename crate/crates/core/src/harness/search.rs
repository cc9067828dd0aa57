//! Falsification search: random sampling followed by coordinate descent on
//! the normalized margin of a single-point check.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::characterizations::{condition_a_at, condition_e_check, convexity_at, sample_pair, BivariateFunctional, FunctionalKind};
use crate::entropy::Variant;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix};
use crate::phi::ScalarFunction;
use crate::report::VerificationReport;
use crate::sampling::{sample_direction, sample_spectrum_in, trial_rng};
use crate::trials::TrialConfig;

/// A violation counts only when `margin < −SUCCESS_FACTOR · tolerance`.
pub const SUCCESS_FACTOR: f64 = 10.0;
const CHUNK: usize = 256;
const INITIAL_STEP: f64 = 0.05;
const MIN_STEP: f64 = 1e-10;

/// Checks the search knows how to parametrize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchTarget {
    Convexity(FunctionalKind),
    ConditionA,
    ConditionE,
}

impl fmt::Display for SearchTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchTarget::Convexity(k) => write!(f, "{k}"),
            SearchTarget::ConditionA => f.write_str("condition_a"),
            SearchTarget::ConditionE => f.write_str("condition_e"),
        }
    }
}

impl FromStr for SearchTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "condition_a" | "a" => Ok(SearchTarget::ConditionA),
            "condition_e" | "e" | "item_e" => Ok(SearchTarget::ConditionE),
            "item_b" => Ok(SearchTarget::Convexity(FunctionalKind::BregmanA)),
            "item_c" => Ok(SearchTarget::Convexity(FunctionalKind::MapB)),
            "item_d" => Ok(SearchTarget::Convexity(FunctionalKind::MapC)),
            "item_f" => Ok(SearchTarget::Convexity(FunctionalKind::GapFt)),
            other => other
                .parse::<FunctionalKind>()
                .map(SearchTarget::Convexity)
                .map_err(|_| Error::Config(format!("no counterexample search for check `{other}`"))),
        }
    }
}

/// Parameters of one search run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub target: SearchTarget,
    pub variant: Variant,
    pub dim: usize,
    pub budget: u64,
    pub seed: u64,
    pub spectrum: (f64, f64),
}

impl SearchConfig {
    pub fn new(target: SearchTarget, dim: usize, budget: u64, seed: u64) -> Self {
        Self {
            target,
            variant: Variant::Trace,
            dim,
            budget,
            seed,
            spectrum: TrialConfig::default().spectrum,
        }
    }

    fn n_matrices(&self) -> usize {
        match self.target {
            SearchTarget::Convexity(_) => 4,
            SearchTarget::ConditionA | SearchTarget::ConditionE => 3,
        }
    }

    fn n_scalars(&self) -> usize {
        match self.target {
            SearchTarget::Convexity(FunctionalKind::GapFt) => 2,
            SearchTarget::Convexity(_) | SearchTarget::ConditionA => 1,
            SearchTarget::ConditionE => 0,
        }
    }

    fn n_params(&self) -> usize {
        self.n_matrices() * self.dim * self.dim + self.n_scalars()
    }
}

/// Real coordinates of a Hermitian matrix: diagonal, then `(re, im)` of the upper triangle.
fn encode(m: &HermitianMatrix, out: &mut Vec<f64>) {
    let a = m.as_matrix();
    let d = m.dim();
    out.extend((0..d).map(|i| a[(i, i)].re));
    for i in 0..d {
        for j in i + 1..d {
            out.push(a[(i, j)].re);
            out.push(a[(i, j)].im);
        }
    }
}

fn decode(p: &[f64], d: usize) -> HermitianMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(p[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            m[(i, j)] = Complex64::new(p[k], p[k + 1]);
            m[(j, i)] = m[(i, j)].conj();
            k += 2;
        }
    }
    HermitianMatrix::from_matrix_unchecked(m)
}

struct Point {
    mats: Vec<HermitianMatrix>,
    scalars: Vec<f64>,
}

fn unpack(cfg: &SearchConfig, theta: &[f64]) -> Point {
    let block = cfg.dim * cfg.dim;
    let mats = (0..cfg.n_matrices()).map(|i| decode(&theta[i * block..(i + 1) * block], cfg.dim)).collect();
    let scalars = theta[cfg.n_matrices() * block..].iter().map(|s| s.clamp(0.0, 1.0)).collect();
    Point { mats, scalars }
}

fn sample_point<R: Rng + ?Sized>(rng: &mut R, cfg: &SearchConfig) -> Vec<f64> {
    let (lo, hi) = cfg.spectrum;
    let tc = TrialConfig {
        dim: cfg.dim,
        spectrum: cfg.spectrum,
        ..Default::default()
    };
    let mats: Vec<HermitianMatrix> = match cfg.target {
        SearchTarget::Convexity(kind) => {
            let (u1, v1) = sample_pair(rng, kind, &tc);
            let (u2, v2) = sample_pair(rng, kind, &tc);
            vec![u1, v1, u2, v2]
        }
        SearchTarget::ConditionA => vec![
            sample_spectrum_in(rng, cfg.dim, lo, hi),
            sample_spectrum_in(rng, cfg.dim, lo, hi),
            sample_direction(rng, cfg.dim),
        ],
        SearchTarget::ConditionE => vec![
            sample_spectrum_in(rng, cfg.dim, lo, hi),
            sample_direction(rng, cfg.dim),
            sample_direction(rng, cfg.dim),
        ],
    };
    let mut theta = Vec::with_capacity(cfg.n_params());
    for m in &mats {
        encode(m, &mut theta);
    }
    for _ in 0..cfg.n_scalars() {
        theta.push(rng.random_range(0.0..1.0));
    }
    theta
}

/// Single-point report at parameter vector `theta`.
fn evaluate(f: &ScalarFunction, cfg: &SearchConfig, theta: &[f64]) -> Result<VerificationReport> {
    let p = unpack(cfg, theta);
    let m = &p.mats;
    match cfg.target {
        SearchTarget::Convexity(kind) => {
            let t = (kind == FunctionalKind::GapFt).then(|| p.scalars[1]);
            let bf = BivariateFunctional::new(kind, f.clone(), t, cfg.variant)?;
            convexity_at(&bf, (&m[0], &m[1]), (&m[2], &m[3]), p.scalars[0])
        }
        SearchTarget::ConditionA => condition_a_at(f, &m[0], &m[1], &m[2], p.scalars[0]),
        SearchTarget::ConditionE => condition_e_check(f, &m[0], &m[1], &m[2]),
    }
}

fn score(r: &VerificationReport) -> f64 {
    r.normalized_margin()
}

fn is_violation(r: &VerificationReport) -> bool {
    r.margin < -SUCCESS_FACTOR * r.tolerance
}

fn point_json(cfg: &SearchConfig, theta: &[f64]) -> Value {
    let p = unpack(cfg, theta);
    json!({ "matrices": p.mats, "scalars": p.scalars })
}

fn search_name(f: &ScalarFunction, cfg: &SearchConfig) -> String {
    format!("counterexample_search/{}/{}/{f}", cfg.target, cfg.variant)
}

fn finish(f: &ScalarFunction, cfg: &SearchConfig, best: (Vec<f64>, VerificationReport), evaluations: u64) -> VerificationReport {
    let (theta, r) = best;
    let tolerance = SUCCESS_FACTOR * r.tolerance;
    let found = is_violation(&r);
    let mut out = VerificationReport::from_margin(search_name(f, cfg), r.margin, tolerance).with_trials(evaluations);
    out.holds = !found;
    out.with_witness(json!({
        "function": f.name(),
        "search": cfg,
        "theta": theta,
        "point": point_json(cfg, &theta),
    }))
}

/// Looks for a violation of `target` for `f` with at most `budget` evaluations:
/// half on independent random draws, the rest on coordinate descent from the
/// best draw. A report with `holds == false` carries a witness that
/// [`replay_search_witness`] turns back into the violating evaluation.
pub fn counterexample_search(f: &ScalarFunction, cfg: &SearchConfig) -> Result<VerificationReport> {
    if cfg.dim == 0 || cfg.budget == 0 {
        return Err(Error::Config("search needs a positive dimension and budget".into()));
    }
    let stream = search_name(f, cfg);
    let n_random = (cfg.budget / 2).max(1);
    let mut best: Option<(Vec<f64>, VerificationReport)> = None;
    let mut evaluations = 0;
    let mut start = 0;
    while start < n_random {
        let end = (start + CHUNK as u64).min(n_random);
        let chunk: Vec<Option<(Vec<f64>, VerificationReport)>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let theta = sample_point(&mut trial_rng(cfg.seed, &stream, i), cfg);
                evaluate(f, cfg, &theta).ok().map(|r| (theta, r))
            })
            .collect();
        for (k, item) in chunk.into_iter().enumerate() {
            evaluations = start + k as u64 + 1;
            if let Some((theta, r)) = item {
                let better = best.as_ref().is_none_or(|(_, b)| score(&r) < score(b));
                let hit = is_violation(&r);
                if better {
                    best = Some((theta, r));
                }
                if hit {
                    return Ok(finish(f, cfg, best.unwrap(), evaluations));
                }
            }
        }
        start = end;
    }
    let Some((mut theta, mut report)) = best else {
        return Err(Error::Config(format!("{stream}: no sampled point was inside the domain")));
    };
    let mut steps: Vec<f64> = theta.iter().map(|x| INITIAL_STEP * (1.0 + x.abs())).collect();
    while evaluations < cfg.budget && steps.iter().any(|&s| s > MIN_STEP) {
        let mut improved = false;
        for j in 0..theta.len() {
            for sign in [1.0, -1.0] {
                if evaluations >= cfg.budget {
                    break;
                }
                let mut cand = theta.clone();
                cand[j] += sign * steps[j];
                evaluations += 1;
                if let Ok(r) = evaluate(f, cfg, &cand) {
                    if score(&r) < score(&report) {
                        theta = cand;
                        report = r;
                        improved = true;
                        if is_violation(&report) {
                            return Ok(finish(f, cfg, (theta, report), evaluations));
                        }
                        break;
                    }
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    Ok(finish(f, cfg, (theta, report), evaluations))
}

/// Re-evaluates the point stored in a search witness.
pub fn replay_search_witness(f: &ScalarFunction, witness: &Value) -> Result<VerificationReport> {
    let cfg: SearchConfig = serde_json::from_value(witness["search"].clone())?;
    let theta: Vec<f64> = serde_json::from_value(witness["theta"].clone())?;
    if theta.len() != cfg.n_params() {
        return Err(Error::Config(format!("witness has {} parameters, expected {}", theta.len(), cfg.n_params())));
    }
    let r = evaluate(f, &cfg, &theta)?;
    let mut out = VerificationReport::from_margin(search_name(f, &cfg), r.margin, SUCCESS_FACTOR * r.tolerance);
    out.holds = !is_violation(&r);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_round_trips() {
        let mut rng = trial_rng(0, "enc", 0);
        let m = crate::sampling::sample_hermitian(&mut rng, 3, 1.0);
        let mut v = Vec::new();
        encode(&m, &mut v);
        assert_eq!(v.len(), 9);
        assert_eq!(decode(&v, 3), m);
    }

    #[test]
    fn quartic_map_c_is_falsified_in_one_dimension() {
        let f = ScalarFunction::quartic();
        let cfg = SearchConfig::new("map_C".parse().unwrap(), 1, 10_000, 1);
        let r = counterexample_search(&f, &cfg).unwrap();
        assert!(!r.holds && r.trials <= 10_000, "{r:?}");
        assert!(r.margin < -r.tolerance);
        let again = replay_search_witness(&f, r.witness.as_ref().unwrap()).unwrap();
        assert_eq!(again.margin, r.margin);
        assert!(!again.holds);
    }

    #[test]
    fn exp_condition_a_is_falsified_in_one_dimension() {
        let f = ScalarFunction::exp();
        let cfg = SearchConfig::new(SearchTarget::ConditionA, 1, 10_000, 2);
        let r = counterexample_search(&f, &cfg).unwrap();
        assert!(!r.holds, "{r:?}");
    }

    #[test]
    fn square_survives() {
        let f = ScalarFunction::square();
        for target in ["map_C", "bregman_A", "gap_F_t", "condition_a"] {
            let cfg = SearchConfig::new(target.parse().unwrap(), 2, 400, 3);
            let r = counterexample_search(&f, &cfg).unwrap();
            assert!(r.holds && r.trials == 400, "{target}: {r:?}");
        }
    }

    #[test]
    fn unknown_target() {
        assert!(matches!("subadditivity".parse::<SearchTarget>(), Err(Error::Config(_))));
    }
}
