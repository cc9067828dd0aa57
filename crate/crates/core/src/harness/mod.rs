//! Suite runner: expands a [`RunConfig`] into one entry per
//! (check, function, variant, dimension), runs them in a fixed order on a
//! bounded thread pool and collects a [`SuiteReport`].

mod search;

pub use search::{counterexample_search, replay_search_witness, SearchConfig, SearchTarget, SUCCESS_FACTOR};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{covariant_monotonicity_sweep, monotonicity_sweep, operator_jensen_sweep};
use crate::characterizations::{
    condition_a_check, condition_e_sweep, conditional_jensen_sweep, convexity_at, convexity_lemma_sweep,
    entropy_convexity_sweep, integral_relation_sweep, joint_convexity_test, sample_pair, BivariateFunctional,
    FunctionalKind, DEFAULT_LAMBDAS,
};
use crate::entropy::{
    check_operator_efron_stein, check_polynomial_efron_stein, check_subadditivity, dual_representation_gap,
    interpolation_derivative_scan, ProductEnsemble, Variant,
};
use crate::error::{Error, Result};
use crate::frechet::oracle_agreement_sweep;
use crate::phi::{ClassTag, ScalarFunction};
use crate::report::VerificationReport;
use crate::sampling::{sample_coupled, sample_ensemble, sample_product};
use crate::trials::{run_trials, TrialConfig};

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "PHI_LAB_THREADS";
pub const MAX_DIM: usize = 16;
const ATOMS: usize = 3;
const KRAUS: usize = 3;
const QUADRATURE_POINTS: usize = 32;
const INTERPOLATION_GRID: usize = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuiteCheck {
    FrechetOracleD1,
    FrechetOracleD2,
    FrechetOracleD3,
    Subadditivity,
    EfronStein,
    PolyEfronStein,
    DualRepresentation,
    Interpolation,
    ItemB,
    ItemC,
    ItemD,
    ItemF,
    ItemG,
    ItemH,
    ConditionA,
    ConditionE,
    IntegralRelation,
    ConvexityLemma,
    Monotonicity,
    CovariantMonotonicity,
    Jensen,
}

impl SuiteCheck {
    pub const ALL: [SuiteCheck; 21] = [
        SuiteCheck::FrechetOracleD1,
        SuiteCheck::FrechetOracleD2,
        SuiteCheck::FrechetOracleD3,
        SuiteCheck::Subadditivity,
        SuiteCheck::EfronStein,
        SuiteCheck::PolyEfronStein,
        SuiteCheck::DualRepresentation,
        SuiteCheck::Interpolation,
        SuiteCheck::ItemB,
        SuiteCheck::ItemC,
        SuiteCheck::ItemD,
        SuiteCheck::ItemF,
        SuiteCheck::ItemG,
        SuiteCheck::ItemH,
        SuiteCheck::ConditionA,
        SuiteCheck::ConditionE,
        SuiteCheck::IntegralRelation,
        SuiteCheck::ConvexityLemma,
        SuiteCheck::Monotonicity,
        SuiteCheck::CovariantMonotonicity,
        SuiteCheck::Jensen,
    ];

    /// Checks run when a config names none.
    pub const DEFAULT: [SuiteCheck; 16] = [
        SuiteCheck::FrechetOracleD1,
        SuiteCheck::FrechetOracleD2,
        SuiteCheck::FrechetOracleD3,
        SuiteCheck::Subadditivity,
        SuiteCheck::EfronStein,
        SuiteCheck::PolyEfronStein,
        SuiteCheck::DualRepresentation,
        SuiteCheck::ItemB,
        SuiteCheck::ItemC,
        SuiteCheck::ItemD,
        SuiteCheck::ItemF,
        SuiteCheck::ItemG,
        SuiteCheck::ConditionA,
        SuiteCheck::ConditionE,
        SuiteCheck::Monotonicity,
        SuiteCheck::Jensen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteCheck::FrechetOracleD1 => "frechet_oracle_d1",
            SuiteCheck::FrechetOracleD2 => "frechet_oracle_d2",
            SuiteCheck::FrechetOracleD3 => "frechet_oracle_d3",
            SuiteCheck::Subadditivity => "subadditivity",
            SuiteCheck::EfronStein => "efron_stein",
            SuiteCheck::PolyEfronStein => "poly_efron_stein",
            SuiteCheck::DualRepresentation => "dual_representation",
            SuiteCheck::Interpolation => "interpolation",
            SuiteCheck::ItemB => "item_b",
            SuiteCheck::ItemC => "item_c",
            SuiteCheck::ItemD => "item_d",
            SuiteCheck::ItemF => "item_f",
            SuiteCheck::ItemG => "item_g",
            SuiteCheck::ItemH => "item_h",
            SuiteCheck::ConditionA => "condition_a",
            SuiteCheck::ConditionE => "condition_e",
            SuiteCheck::IntegralRelation => "integral_relation",
            SuiteCheck::ConvexityLemma => "convexity_lemma",
            SuiteCheck::Monotonicity => "monotonicity",
            SuiteCheck::CovariantMonotonicity => "covariant_monotonicity",
            SuiteCheck::Jensen => "jensen",
        }
    }

    fn uses_phi(self) -> bool {
        !matches!(self, SuiteCheck::EfronStein | SuiteCheck::PolyEfronStein)
    }

    /// Whether the check has separate trace and operator forms.
    fn per_variant(self) -> bool {
        matches!(
            self,
            SuiteCheck::Subadditivity
                | SuiteCheck::DualRepresentation
                | SuiteCheck::Interpolation
                | SuiteCheck::ItemB
                | SuiteCheck::ItemC
                | SuiteCheck::ItemD
                | SuiteCheck::ItemF
                | SuiteCheck::ItemG
                | SuiteCheck::ItemH
                | SuiteCheck::Monotonicity
        )
    }

    /// Class tag a function needs for the check to be expected to hold.
    fn required_class(self, variant: Option<Variant>) -> Option<ClassTag> {
        match self {
            SuiteCheck::FrechetOracleD1
            | SuiteCheck::FrechetOracleD2
            | SuiteCheck::FrechetOracleD3
            | SuiteCheck::EfronStein
            | SuiteCheck::PolyEfronStein
            | SuiteCheck::IntegralRelation => None,
            SuiteCheck::ConditionA | SuiteCheck::ConditionE | SuiteCheck::ConvexityLemma => Some(ClassTag::C2),
            SuiteCheck::CovariantMonotonicity => Some(ClassTag::C3),
            SuiteCheck::Jensen => Some(ClassTag::C1),
            _ => Some(variant.unwrap_or_default().required_class()),
        }
    }

    /// Search target for out-of-class runs, when the check has one.
    fn search_target(self) -> Option<SearchTarget> {
        match self {
            SuiteCheck::ItemB => Some(SearchTarget::Convexity(FunctionalKind::BregmanA)),
            SuiteCheck::ItemC => Some(SearchTarget::Convexity(FunctionalKind::MapB)),
            SuiteCheck::ItemD => Some(SearchTarget::Convexity(FunctionalKind::MapC)),
            SuiteCheck::ItemF => Some(SearchTarget::Convexity(FunctionalKind::GapFt)),
            SuiteCheck::ConditionA => Some(SearchTarget::ConditionA),
            SuiteCheck::ConditionE => Some(SearchTarget::ConditionE),
            _ => None,
        }
    }
}

impl fmt::Display for SuiteCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteCheck {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SuiteCheck::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check `{s}`")))
    }
}

impl Serialize for SuiteCheck {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SuiteCheck {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantSelection {
    Trace,
    Operator,
    #[default]
    Both,
}

impl VariantSelection {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantSelection::Trace => vec![Variant::Trace],
            VariantSelection::Operator => vec![Variant::Operator],
            VariantSelection::Both => vec![Variant::Trace, Variant::Operator],
        }
    }
}

impl FromStr for VariantSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(VariantSelection::Trace),
            "operator" => Ok(VariantSelection::Operator),
            "both" => Ok(VariantSelection::Both),
            other => Err(Error::Config(format!("unknown variant selection `{other}`"))),
        }
    }
}

/// Configuration of a suite run; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub trials: u64,
    /// Absolute tolerances replacing a check's own, keyed by check name.
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub phi_list: Vec<String>,
    pub variant: VariantSelection,
    pub checks: Vec<SuiteCheck>,
    /// Run checks on functions lacking the required class tag.
    pub allow_outside_class: bool,
    /// Evaluations per counterexample search on out-of-class entries.
    pub search_budget: u64,
    pub spectrum: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dims: vec![2, 3, 4],
            trials: 200,
            tolerance_overrides: BTreeMap::new(),
            phi_list: vec!["square".into(), "xlogx".into()],
            variant: VariantSelection::Both,
            checks: SuiteCheck::DEFAULT.to_vec(),
            allow_outside_class: false,
            search_budget: 10_000,
            spectrum: TrialConfig::default().spectrum,
            output_path: None,
        }
    }
}

impl RunConfig {
    /// Rejects bad configurations before any computation; returns the parsed functions.
    pub fn validate(&self) -> Result<Vec<ScalarFunction>> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| !(1..=MAX_DIM).contains(&d)) {
            return Err(Error::Config(format!("dims must be a non-empty subset of [1, {MAX_DIM}]")));
        }
        if self.phi_list.is_empty() {
            return Err(Error::Config("phi_list is empty".into()));
        }
        if self.checks.is_empty() {
            return Err(Error::Config("no checks selected".into()));
        }
        if self.search_budget == 0 {
            return Err(Error::Config("search_budget must be at least 1".into()));
        }
        for (name, &tol) in &self.tolerance_overrides {
            name.parse::<SuiteCheck>()?;
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::Config(format!("tolerance override for `{name}` must be finite and >= 0")));
            }
        }
        TrialConfig {
            spectrum: self.spectrum,
            ..Default::default()
        }
        .validate()?;
        self.phi_list
            .iter()
            .map(|s| {
                ScalarFunction::parse(s, self.allow_outside_class).map_err(|e| Error::Config(format!("function `{s}`: {e}")))
            })
            .collect()
    }

    fn trial_config(&self, dim: usize, allow_outside_class: bool) -> TrialConfig {
        TrialConfig {
            dim,
            trials: self.trials,
            first_trial: 0,
            seed: self.seed,
            spectrum: self.spectrum,
            allow_outside_class,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// One configured (check, function, variant, dimension) combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub check: SuiteCheck,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub variant: Option<Variant>,
    pub dim: usize,
    /// Whether the function carries the class the check requires.
    pub in_class: bool,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub search: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub skip_reason: Option<String>,
    pub wall_clock_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub in_class_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub config: RunConfig,
    pub summary: Summary,
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    /// `0` when no in-class check failed, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.in_class_failures == 0 {
            0
        } else {
            1
        }
    }

    /// Copy with every timing field zeroed, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|e| e.wall_clock_ms = 0.0);
        out
    }

    pub fn summary_line(&self) -> String {
        let s = &self.summary;
        format!(
            "{} passed, {} failed ({} in-class), {} skipped",
            s.passed, s.failed, s.in_class_failures, s.skipped
        )
    }
}

struct Case<'a> {
    check: SuiteCheck,
    phi: Option<&'a ScalarFunction>,
    variant: Option<Variant>,
}

fn sample_small_product<R: Rng + ?Sized>(rng: &mut R, cfg: &TrialConfig) -> Result<ProductEnsemble> {
    let n = rng.random_range(1..=3);
    let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=3)).collect();
    sample_product(rng, cfg.dim, &sizes, cfg.spectrum.0, cfg.spectrum.1)
}

fn worst(reports: Vec<VerificationReport>, name: String) -> VerificationReport {
    let trials = reports.first().map_or(1, |r| r.trials);
    VerificationReport::merge_worst(name, reports).with_trials(trials)
}

fn item_f_sweep(f: &ScalarFunction, cfg: &TrialConfig, variant: Variant) -> Result<VerificationReport> {
    run_trials(&format!("item_f/{f}/{variant}"), cfg, |rng, _| {
        let t = rng.random_range(0.0..=1.0);
        let bf = BivariateFunctional::new(FunctionalKind::GapFt, f.clone(), Some(t), variant)?;
        let p1 = sample_pair(rng, FunctionalKind::GapFt, cfg);
        let p2 = sample_pair(rng, FunctionalKind::GapFt, cfg);
        let mut ls = DEFAULT_LAMBDAS.to_vec();
        ls.push(rng.random_range(0.0..1.0));
        ls.push(rng.random_range(0.0..1.0));
        let reports = ls
            .iter()
            .map(|&l| convexity_at(&bf, (&p1.0, &p1.1), (&p2.0, &p2.1), l))
            .collect::<Result<Vec<_>>>()?;
        let mut r = worst(reports, bf.name());
        r.witness = Some(serde_json::json!({ "t": t, "u1": p1.0, "v1": p1.1, "u2": p2.0, "v2": p2.1 }));
        Ok(r)
    })
}

fn run_case(case: &Case<'_>, cfg: &TrialConfig) -> Result<VerificationReport> {
    let variant = case.variant.unwrap_or_default();
    let (lo, hi) = cfg.spectrum;
    let f = || case.phi.expect("check needs a function");
    let joint = |kind| joint_convexity_test(&BivariateFunctional::new(kind, f().clone(), None, variant)?, cfg, &DEFAULT_LAMBDAS);
    match case.check {
        SuiteCheck::FrechetOracleD1 => oracle_agreement_sweep(f(), cfg, 1),
        SuiteCheck::FrechetOracleD2 => oracle_agreement_sweep(f(), cfg, 2),
        SuiteCheck::FrechetOracleD3 => oracle_agreement_sweep(f(), cfg, 3),
        SuiteCheck::Subadditivity => run_trials(&format!("subadditivity/{}/{variant}", f()), cfg, |rng, _| {
            check_subadditivity(f(), &sample_small_product(rng, cfg)?, variant, true)
        }),
        SuiteCheck::EfronStein => run_trials("efron_stein", cfg, |rng, _| {
            check_operator_efron_stein(&sample_small_product(rng, cfg)?)
        }),
        SuiteCheck::PolyEfronStein => run_trials("poly_efron_stein", cfg, |rng, _| {
            let p = sample_small_product(rng, cfg)?;
            let reports = (1..=3).map(|e| check_polynomial_efron_stein(&p, e)).collect::<Result<Vec<_>>>()?;
            Ok(worst(reports, "efron_stein/schatten".into()))
        }),
        SuiteCheck::DualRepresentation => run_trials(&format!("dual/{}/{variant}", f()), cfg, |rng, _| {
            let z = sample_ensemble(rng, cfg.dim, ATOMS, lo, hi)?;
            let t = sample_coupled(rng, &z, lo, hi)?;
            dual_representation_gap(f(), &z, &t, variant)
        }),
        SuiteCheck::Interpolation => run_trials(&format!("interpolation/{}/{variant}", f()), cfg, |rng, _| {
            let z = sample_ensemble(rng, cfg.dim, ATOMS, lo, hi)?;
            let t = sample_coupled(rng, &z, lo, hi)?;
            let grid: Vec<f64> = (0..INTERPOLATION_GRID).map(|k| k as f64 / (INTERPOLATION_GRID - 1) as f64).collect();
            interpolation_derivative_scan(f(), &z, &t, &grid, variant).map(|r| r.with_trials(1))
        }),
        SuiteCheck::ItemB => joint(FunctionalKind::BregmanA),
        SuiteCheck::ItemC => joint(FunctionalKind::MapB),
        SuiteCheck::ItemD => joint(FunctionalKind::MapC),
        SuiteCheck::ItemF => item_f_sweep(f(), cfg, variant),
        SuiteCheck::ItemG => conditional_jensen_sweep(f(), cfg, variant, [ATOMS, ATOMS]),
        SuiteCheck::ItemH => entropy_convexity_sweep(f(), cfg, variant, ATOMS),
        SuiteCheck::ConditionA => condition_a_check(f(), cfg),
        SuiteCheck::ConditionE => condition_e_sweep(f(), cfg),
        SuiteCheck::IntegralRelation => integral_relation_sweep(f(), cfg, QUADRATURE_POINTS),
        SuiteCheck::ConvexityLemma => convexity_lemma_sweep(f(), cfg, ATOMS),
        SuiteCheck::Monotonicity => monotonicity_sweep(f(), cfg, variant, KRAUS, ATOMS),
        SuiteCheck::CovariantMonotonicity => covariant_monotonicity_sweep(f(), cfg, KRAUS, ATOMS),
        SuiteCheck::Jensen => operator_jensen_sweep(f(), cfg, KRAUS),
    }
}

fn apply_override(config: &RunConfig, check: SuiteCheck, r: VerificationReport) -> VerificationReport {
    match config.tolerance_overrides.get(check.name()) {
        Some(&t) => r.with_tolerance(t),
        None => r,
    }
}

struct Planned<'a> {
    case: Case<'a>,
    phi_name: Option<String>,
    dim: usize,
    in_class: bool,
    skip_reason: Option<String>,
}

fn plan<'a>(config: &RunConfig, phis: &'a [ScalarFunction]) -> Vec<Planned<'a>> {
    let mut out = Vec::new();
    for &check in &config.checks {
        let fns: Vec<(Option<&ScalarFunction>, Option<String>)> = if check.uses_phi() {
            phis.iter().zip(&config.phi_list).map(|(f, n)| (Some(f), Some(n.clone()))).collect()
        } else {
            vec![(None, None)]
        };
        let variants: Vec<Option<Variant>> = if check.per_variant() {
            config.variant.variants().into_iter().map(Some).collect()
        } else {
            vec![None]
        };
        for (phi, phi_name) in &fns {
            for &variant in &variants {
                for &dim in &config.dims {
                    let in_class = match (phi, check.required_class(variant)) {
                        (Some(f), Some(tag)) => f.has_tag(tag),
                        _ => true,
                    };
                    let skip_reason = if !in_class && !config.allow_outside_class {
                        Some(format!("function lacks class {:?}", check.required_class(variant).unwrap()))
                    } else {
                        None
                    };
                    out.push(Planned {
                        case: Case { check, phi: *phi, variant },
                        phi_name: phi_name.clone(),
                        dim,
                        in_class,
                        skip_reason,
                    });
                }
            }
        }
    }
    out
}

fn execute(config: &RunConfig, p: &Planned<'_>) -> Result<SuiteEntry> {
    let start = Instant::now();
    let mut entry = SuiteEntry {
        check: p.case.check,
        phi: p.phi_name.clone(),
        variant: p.case.variant,
        dim: p.dim,
        in_class: p.in_class,
        status: Status::Skip,
        report: None,
        search: None,
        skip_reason: p.skip_reason.clone(),
        wall_clock_ms: 0.0,
    };
    if entry.skip_reason.is_none() {
        let cfg = config.trial_config(p.dim, !p.in_class);
        let report = apply_override(config, p.case.check, run_case(&p.case, &cfg)?);
        let mut ok = report.holds;
        if !p.in_class {
            if let (Some(target), Some(f)) = (p.case.check.search_target(), p.case.phi) {
                let sc = SearchConfig {
                    target,
                    variant: p.case.variant.unwrap_or_default(),
                    dim: p.dim,
                    budget: config.search_budget,
                    seed: config.seed,
                    spectrum: config.spectrum,
                };
                let found = counterexample_search(f, &sc)?;
                ok &= found.holds;
                entry.search = Some(found);
            }
        }
        entry.status = if ok { Status::Pass } else { Status::Fail };
        entry.report = Some(report);
    }
    entry.wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(entry)
}

/// Thread count from [`THREADS_ENV`], if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

/// Runs the suite on a pool bounded by [`THREADS_ENV`].
pub fn run_suite(config: &RunConfig) -> Result<SuiteReport> {
    run_suite_with_threads(config, threads_from_env()?)
}

/// Runs the suite on a pool of `threads` workers (`None`: one per core).
/// Entries run in configuration order; results do not depend on the pool size.
pub fn run_suite_with_threads(config: &RunConfig, threads: Option<usize>) -> Result<SuiteReport> {
    let phis = config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let planned = plan(config, &phis);
    let entries = pool.install(|| planned.iter().map(|p| execute(config, p)).collect::<Result<Vec<_>>>())?;
    let mut summary = Summary::default();
    for e in &entries {
        match e.status {
            Status::Pass => summary.passed += 1,
            Status::Skip => summary.skipped += 1,
            Status::Fail => {
                summary.failed += 1;
                if e.in_class {
                    summary.in_class_failures += 1;
                }
            }
        }
    }
    Ok(SuiteReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        summary,
        entries,
    })
}

/// Re-evaluates the worst trial recorded in `entry.report` on its own.
/// Returns `None` for entries without a trial witness.
pub fn replay_entry(config: &RunConfig, entry: &SuiteEntry) -> Result<Option<VerificationReport>> {
    let Some(trial) = entry.report.as_ref().and_then(|r| r.witness.as_ref()).and_then(|w| w["trial"].as_u64()) else {
        return Ok(None);
    };
    let phi = entry
        .phi
        .as_deref()
        .map(|s| ScalarFunction::parse(s, config.allow_outside_class))
        .transpose()?;
    let case = Case {
        check: entry.check,
        phi: phi.as_ref(),
        variant: entry.variant,
    };
    let cfg = config.trial_config(entry.dim, !entry.in_class).replay(trial);
    Ok(Some(apply_override(config, entry.check, run_case(&case, &cfg)?)))
}
