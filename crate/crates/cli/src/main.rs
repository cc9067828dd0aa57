use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use phi_lab_core::channels::{check_monotonicity, sample_unital_channel};
use phi_lab_core::characterizations::{
    condition_a_check, condition_e_sweep, conditional_jensen_sweep, entropy_convexity_sweep, joint_convexity_test,
    BivariateFunctional, FunctionalKind, DEFAULT_LAMBDAS,
};
use phi_lab_core::entropy::{
    check_operator_efron_stein, check_polynomial_efron_stein, check_subadditivity, phi_entropy,
};
use phi_lab_core::frechet::frechet_directional;
use phi_lab_core::harness::{counterexample_search, run_suite, SearchConfig, SuiteCheck, VariantSelection};
use phi_lab_core::sampling::{sample_ensemble, sample_product};
use phi_lab_core::trials::run_trials;
use phi_lab_core::{
    HermitianMatrix, KrausChannel, MatrixEnsemble, ProductEnsemble, RunConfig, ScalarFunction, TrialConfig, Variant,
    VerificationReport,
};

/// Matrix Φ-entropies, Fréchet derivatives and seeded inequality checks.
#[derive(Parser)]
#[command(name = "phi-entropy-lab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed of every random stream [default: 0, or the config's seed].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Absolute tolerance replacing the checks' own.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print only a one-line summary.
    #[arg(long, global = true)]
    quiet: bool,
    /// Run class-gated checks on functions outside the class.
    #[arg(long, global = true)]
    allow_outside_class: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Φ-entropy of an ensemble file.
    Entropy {
        #[arg(long)]
        phi: String,
        #[arg(long, default_value = "trace")]
        variant: Variant,
        #[arg(long)]
        input: PathBuf,
    },
    /// Directional derivative D^kΦ[A](X, …, X).
    Frechet {
        #[arg(long)]
        phi: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        order: u8,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        direction: PathBuf,
    },
    /// Subadditivity on a product ensemble file, or on random ones.
    CheckSubadditivity {
        #[arg(long)]
        phi: String,
        #[arg(long, default_value = "trace")]
        variant: Variant,
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// Operator Efron-Stein (and optionally its Schatten form).
    CheckEfronStein {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also check the Schatten-p^p form for this exponent.
        #[arg(long)]
        exponent: Option<u32>,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// Convexity characterizations; one report per item.
    CheckCharacterizations {
        #[arg(long)]
        phi: String,
        /// Comma-separated items among a,b,c,d,e,f,g,h.
        #[arg(long, default_value = "b,c,d,e,f,g", value_delimiter = ',')]
        items: Vec<String>,
        #[arg(long, default_value = "trace")]
        variant: Variant,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// Entropy monotonicity under a unital channel.
    CheckMonotonicity {
        #[arg(long)]
        phi: String,
        #[arg(long, default_value = "trace")]
        variant: Variant,
        /// Channel file, or `random:k` for mixed-unitary channels with k terms.
        #[arg(long, default_value = "random:3")]
        channel: String,
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// Random + coordinate search for a violation.
    SearchCounterexample {
        #[arg(long)]
        phi: String,
        /// bregman_A, map_B, map_C, gap_F_t, condition_a or condition_e.
        #[arg(long)]
        check: String,
        #[arg(long, default_value = "trace")]
        variant: Variant,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
    /// Configured suite of checks.
    RunSuite {
        /// JSON run configuration; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated matrix dimensions.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Trials per (check, Φ, variant, dimension).
        #[arg(long)]
        trials: Option<u64>,
        /// Comma-separated Φ names, e.g. `square,xlogx,power:1.5`.
        #[arg(long, value_delimiter = ',')]
        phi: Option<Vec<String>>,
        /// Comma-separated check names.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// `trace`, `operator` or `both`.
        #[arg(long)]
        variant: Option<String>,
    },
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    trials: u64,
}

impl RandomArgs {
    fn config(&self, g: &Global) -> TrialConfig {
        TrialConfig {
            dim: self.dim,
            trials: self.trials,
            seed: g.seed.unwrap_or(0),
            allow_outside_class: g.allow_outside_class,
            ..Default::default()
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn phi(name: &str, g: &Global) -> Result<ScalarFunction> {
    Ok(ScalarFunction::parse(name, g.allow_outside_class)?)
}

fn rejudge(r: VerificationReport, g: &Global) -> VerificationReport {
    match g.tol {
        Some(t) => r.with_tolerance(t),
        None => r,
    }
}

fn item_report(item: &str, f: &ScalarFunction, variant: Variant, cfg: &TrialConfig) -> Result<VerificationReport> {
    let joint = |kind| -> Result<VerificationReport> {
        let t = (kind == FunctionalKind::GapFt).then_some(0.5);
        Ok(joint_convexity_test(&BivariateFunctional::new(kind, f.clone(), t, variant)?, cfg, &DEFAULT_LAMBDAS)?)
    };
    Ok(match item {
        "a" => condition_a_check(f, cfg)?,
        "b" => joint(FunctionalKind::BregmanA)?,
        "c" => joint(FunctionalKind::MapB)?,
        "d" => joint(FunctionalKind::MapC)?,
        "e" if variant == Variant::Operator => bail!("item e has no operator form"),
        "e" => condition_e_sweep(f, cfg)?,
        "f" => joint(FunctionalKind::GapFt)?,
        "g" => conditional_jensen_sweep(f, cfg, variant, [3, 3])?,
        "h" => entropy_convexity_sweep(f, cfg, variant, 3)?,
        other => bail!("unknown item `{other}`"),
    })
}

fn parse_channel(spec: &str) -> Result<Option<KrausChannel>> {
    match spec.strip_prefix("random:") {
        Some(k) => {
            let k: usize = k.parse().with_context(|| format!("bad Kraus count in `{spec}`"))?;
            if k == 0 {
                bail!("random channels need at least one Kraus operator");
            }
            Ok(None)
        }
        None => Ok(Some(read_json(Path::new(spec))?)),
    }
}

enum Outcome {
    Value(Value, String),
    Reports(Vec<VerificationReport>),
    Suite(Box<phi_lab_core::SuiteReport>),
    Search(VerificationReport),
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if let Some(t) = g.tol {
        if !(t >= 0.0 && t.is_finite()) {
            bail!("--tol must be finite and >= 0, got {t}");
        }
    }
    Ok(match &cli.command {
        Command::Entropy { phi: name, variant, input } => {
            let f = phi(name, g)?;
            let e: MatrixEnsemble = read_json(input)?;
            let v = phi_entropy(&f, &e, *variant)?;
            let line = match &v {
                phi_lab_core::EntropyValue::Scalar(x) => format!("H = {x:e}"),
                phi_lab_core::EntropyValue::Matrix(m) => format!("H: {}x{} matrix, min eigenvalue {:e}", m.dim(), m.dim(), m.min_eigenvalue()),
            };
            Outcome::Value(serde_json::to_value(v)?, line)
        }
        Command::Frechet { phi: name, order, matrix, direction } => {
            let f = phi(name, g)?;
            let a: HermitianMatrix = read_json(matrix)?;
            let x: HermitianMatrix = read_json(direction)?;
            let d = frechet_directional(&f, &a, &x, *order as usize)?;
            let line = format!("D^{order}: spectral norm {:e}", d.spectral_norm());
            Outcome::Value(serde_json::to_value(d)?, line)
        }
        Command::CheckSubadditivity { phi: name, variant, input, random } => {
            let f = phi(name, g)?;
            let r = match input {
                Some(path) => {
                    let p: ProductEnsemble = read_json(path)?;
                    check_subadditivity(&f, &p, *variant, g.allow_outside_class)?
                }
                None => {
                    let cfg = random.config(g);
                    let (lo, hi) = cfg.spectrum;
                    run_trials(&format!("subadditivity/{f}/{variant}"), &cfg, |rng, _| {
                        let p = sample_product(rng, cfg.dim, &[2, 2], lo, hi)?;
                        check_subadditivity(&f, &p, *variant, g.allow_outside_class)
                    })?
                }
            };
            Outcome::Reports(vec![rejudge(r, g)])
        }
        Command::CheckEfronStein { input, exponent, random } => {
            let products: Vec<ProductEnsemble> = match input {
                Some(path) => vec![read_json(path)?],
                None => Vec::new(),
            };
            let one = |p: &ProductEnsemble| -> phi_lab_core::Result<Vec<VerificationReport>> {
                let mut v = vec![check_operator_efron_stein(p)?];
                if let Some(e) = exponent {
                    v.push(check_polynomial_efron_stein(p, *e)?);
                }
                Ok(v)
            };
            let reports = if let Some(p) = products.first() {
                one(p)?
            } else {
                let cfg = random.config(g);
                let (lo, hi) = cfg.spectrum;
                let sample = |rng: &mut _| sample_product(rng, cfg.dim, &[2, 2], lo, hi);
                let mut v = vec![run_trials("efron_stein", &cfg, |rng, _| check_operator_efron_stein(&sample(rng)?))?];
                if let Some(e) = exponent {
                    v.push(run_trials(&format!("efron_stein/schatten_{e}"), &cfg, |rng, _| {
                        check_polynomial_efron_stein(&sample(rng)?, *e)
                    })?);
                }
                v
            };
            Outcome::Reports(reports.into_iter().map(|r| rejudge(r, g)).collect())
        }
        Command::CheckCharacterizations { phi: name, items, variant, random } => {
            let f = phi(name, g)?;
            let cfg = random.config(g);
            let reports = items
                .iter()
                .map(|i| item_report(i.trim(), &f, *variant, &cfg).map(|r| rejudge(r, g)))
                .collect::<Result<Vec<_>>>()
                ?;
            Outcome::Reports(reports)
        }
        Command::CheckMonotonicity { phi: name, variant, channel, input, random } => {
            let f = phi(name, g)?;
            let fixed = parse_channel(channel)?;
            let ensemble: Option<MatrixEnsemble> = input.as_deref().map(read_json).transpose()?;
            let kraus: usize = channel.strip_prefix("random:").and_then(|k| k.parse().ok()).unwrap_or(0);
            let mut cfg = random.config(g);
            if let Some(e) = &ensemble {
                cfg.dim = e.dim();
            }
            if let Some(n) = &fixed {
                cfg.dim = n.dim();
            }
            let (lo, hi) = cfg.spectrum;
            let r = match (&fixed, &ensemble) {
                (Some(n), Some(e)) => check_monotonicity(&f, n, e, *variant, g.allow_outside_class)?,
                _ => run_trials(&format!("monotonicity/{variant}/{f}"), &cfg, |rng, _| {
                    let n = match &fixed {
                        Some(n) => n.clone(),
                        None => sample_unital_channel(rng, cfg.dim, kraus)?,
                    };
                    let e = match &ensemble {
                        Some(e) => e.clone(),
                        None => sample_ensemble(rng, cfg.dim, 3, lo, hi)?,
                    };
                    check_monotonicity(&f, &n, &e, *variant, g.allow_outside_class)
                })?,
            };
            Outcome::Reports(vec![rejudge(r, g)])
        }
        Command::SearchCounterexample { phi: name, check, variant, dim, budget } => {
            let f = ScalarFunction::parse(name, true)?;
            let mut sc = SearchConfig::new(check.parse::<phi_lab_core::harness::SearchTarget>()?, *dim, *budget, g.seed.unwrap_or(0));
            sc.variant = *variant;
            Outcome::Search(counterexample_search(&f, &sc)?)
        }
        Command::RunSuite { config, dims, trials, phi: phis, checks, variant } => {
            let mut rc: RunConfig = match config {
                Some(path) => read_json(path)?,
                None => RunConfig::default(),
            };
            if let Some(seed) = g.seed {
                rc.seed = seed;
            }
            rc.allow_outside_class |= g.allow_outside_class;
            if let Some(d) = dims {
                rc.dims = d.clone();
            }
            if let Some(t) = trials {
                rc.trials = *t;
            }
            if let Some(p) = phis {
                rc.phi_list = p.clone();
            }
            if let Some(c) = checks {
                rc.checks = c
                    .iter()
                    .map(|s| s.parse::<SuiteCheck>())
                    .collect::<phi_lab_core::Result<_>>()?;
            }
            if let Some(v) = variant {
                rc.variant = v.parse::<VariantSelection>()?;
            }
            if let Some(t) = g.tol {
                for c in &rc.checks {
                    rc.tolerance_overrides.entry(c.name().to_string()).or_insert(t);
                }
            }
            if let Some(o) = &g.output {
                rc.output_path = Some(o.display().to_string());
            }
            rc.validate()?;
            Outcome::Suite(Box::new(run_suite(&rc)?))
        }
    })
}

fn verdict(r: &VerificationReport) -> String {
    format!(
        "{} {} margin={:e} tol={:e} trials={}",
        if r.holds { "PASS" } else { "FAIL" },
        r.check_name,
        r.margin,
        r.tolerance,
        r.trials
    )
}

fn emit(g: &Global, json: &Value, lines: &[String]) -> Result<()> {
    let text = serde_json::to_string_pretty(json)?;
    match &g.output {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None if !g.quiet => println!("{text}"),
        None => {}
    }
    if g.quiet || g.output.is_some() {
        for l in lines {
            println!("{l}");
        }
    }
    Ok(())
}

fn finish(cli: &Cli, outcome: Outcome) -> Result<u8> {
    let g = &cli.global;
    match outcome {
        Outcome::Value(v, line) => {
            emit(g, &v, &[line])?;
            Ok(0)
        }
        Outcome::Reports(rs) => {
            let json = if rs.len() == 1 && !matches!(cli.command, Command::CheckCharacterizations { .. }) {
                serde_json::to_value(&rs[0])?
            } else {
                serde_json::to_value(&rs)?
            };
            emit(g, &json, &rs.iter().map(verdict).collect::<Vec<_>>())?;
            Ok(if rs.iter().all(|r| r.holds) { 0 } else { 1 })
        }
        Outcome::Search(r) => {
            let line = if r.holds {
                format!("no violation in {} evaluations (best margin {:e})", r.trials, r.margin)
            } else {
                format!("violation found after {} evaluations: margin {:e}", r.trials, r.margin)
            };
            emit(g, &serde_json::to_value(&r)?, &[line])?;
            Ok(if r.holds { 0 } else { 1 })
        }
        Outcome::Suite(s) => {
            emit(g, &serde_json::to_value(&*s)?, &[s.summary_line()])?;
            Ok(s.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli).and_then(|o| finish(&cli, o)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
