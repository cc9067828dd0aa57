//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::fmt::Write as _;
use std::io::Write as _;
use std::time::Instant;

use rand::Rng;

use phi_lab_core::channels::{check_monotonicity, monotonicity_sweep, KrausChannel};
use phi_lab_core::characterizations::{
    condition_a_at, condition_e_sides, condition_e_sweep, conditional_jensen_check, conditional_jensen_sweep,
    convexity_at, convexity_lemma_check, eval_functional, joint_convexity_test, BivariateFunctional, FunctionalKind,
    PairEnsemble, CONDITION_E_REL_TOL, DEFAULT_LAMBDAS,
};
use phi_lab_core::entropy::{
    check_operator_efron_stein, check_polynomial_efron_stein, check_subadditivity, dual_representation_gap,
    interpolation_derivative_scan, interpolation_values, matrix_phi_entropy,
};
use phi_lab_core::frechet::{frechet_d2, oracle_agreement_sweep, trace_duality};
use phi_lab_core::harness::{counterexample_search, run_suite_with_threads, SearchConfig, SearchTarget};
use phi_lab_core::sampling::{
    haar_unitary, random_weights, sample_coupled, sample_direction, sample_ensemble, sample_product,
    sample_spectrum_in,
};
use phi_lab_core::trials::run_trials;
use phi_lab_core::{
    HermitianMatrix, MatrixEnsemble, ProductEnsemble, RunConfig, ScalarFunction, TrialConfig, Variant,
    VerificationReport,
};

const SPECTRUM: (f64, f64) = (0.5, 4.0);

struct Criterion {
    id: u8,
    title: &'static str,
    started: Instant,
    failures: Vec<String>,
    checked: usize,
}

impl Criterion {
    fn new(id: u8, title: &'static str) -> Self {
        Self { id, title, started: Instant::now(), failures: Vec::new(), checked: 0 }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn report(&mut self, r: &VerificationReport) {
        self.require(r.holds, || {
            format!("{} margin {:e} tol {:e} witness {}", r.check_name, r.margin, r.tolerance, witness(r))
        });
    }

    fn finish(self) {
        let secs = self.started.elapsed().as_secs_f64();
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!("{status} criterion {}: {} ({} checks, {secs:.1}s)", self.id, self.title, self.checked);
        for f in &self.failures {
            let _ = write!(line, "\n    {f}");
        }
        let _ = writeln!(std::io::stdout().lock(), "{line}");
        assert!(self.failures.is_empty(), "criterion {} failed:\n{}", self.id, self.failures.join("\n"));
    }
}

fn witness(r: &VerificationReport) -> String {
    let s = r.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
    if s.len() > 240 {
        format!("{}...", &s[..240])
    } else {
        s
    }
}

fn cfg(dim: usize, trials: u64, seed: u64) -> TrialConfig {
    TrialConfig { dim, trials, seed, spectrum: SPECTRUM, ..TrialConfig::default() }
}

fn in_class() -> Vec<ScalarFunction> {
    vec![ScalarFunction::square(), ScalarFunction::xlogx(), ScalarFunction::power(1.5).unwrap()]
}

fn random_product<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> ProductEnsemble {
    let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=4)).collect();
    sample_product(rng, d, &sizes, SPECTRUM.0, SPECTRUM.1).unwrap()
}

fn exact(name: &str, err: f64, tol: f64) -> VerificationReport {
    VerificationReport::from_error(name.to_string(), err, tol)
}

#[test]
fn criterion_1_frechet_oracle_agreement() {
    let mut c = Criterion::new(1, "divided differences agree with finite-difference oracles");
    for f in in_class() {
        for order in 1..=3 {
            for (dim, seed) in [(2, 11), (4, 12)] {
                c.report(&oracle_agreement_sweep(&f, &cfg(dim, 500, seed), order).unwrap());
            }
        }
    }
    let secs = c.started.elapsed().as_secs_f64();
    c.require(secs < 30.0, || format!("runtime {secs:.1}s exceeds 30s"));
    c.finish();
}

#[test]
fn criterion_2_exact_identities() {
    let mut c = Criterion::new(2, "second derivative of the square and trace duality");
    let sq = ScalarFunction::square();
    for dim in [2, 3, 5] {
        let r = run_trials("d2_square", &cfg(dim, 500, 21), |rng, _| {
            let a = sample_spectrum_in(rng, dim, SPECTRUM.0, SPECTRUM.1);
            let x = sample_direction(rng, dim);
            let err = (&frechet_d2(&sq, &a, &x, &x)? - &x.square().scale(2.0)).max_abs_entry();
            Ok(exact("d2_square", err, 1e-12))
        })
        .unwrap();
        c.report(&r);
    }
    for f in in_class() {
        for dim in [2, 4] {
            let r = run_trials("trace_duality", &cfg(dim, 500, 22), |rng, _| {
                let a = sample_spectrum_in(rng, dim, SPECTRUM.0, SPECTRUM.1);
                let x = sample_direction(rng, dim);
                let y = sample_direction(rng, dim);
                Ok(exact(&format!("trace_duality/{f}"), trace_duality(&f, &a, &x, &y)?.relative_error, 1e-8))
            })
            .unwrap();
            c.report(&r);
        }
    }
    c.finish();
}

#[test]
fn criterion_3_subadditivity() {
    let mut c = Criterion::new(3, "subadditivity of matrix and operator entropies");
    let combos = [
        (ScalarFunction::square(), Variant::Trace),
        (ScalarFunction::xlogx(), Variant::Trace),
        (ScalarFunction::square(), Variant::Operator),
    ];
    for (f, variant) in &combos {
        for d in [2, 3, 4] {
            for n in 1..=3 {
                let name = format!("subadditivity/{f}/{variant}/d{d}/n{n}");
                let r = run_trials(&name, &cfg(d, 1000, 31), |rng, _| {
                    let p = random_product(rng, d, n);
                    let r = check_subadditivity(f, &p, *variant, false)?;
                    Ok(if n == 1 && r.holds { exact(&name, r.margin.abs(), 1e-12) } else { r })
                })
                .unwrap();
                c.report(&r);
            }
        }
    }
    let secs = c.started.elapsed().as_secs_f64();
    c.require(secs < 120.0, || format!("runtime {secs:.1}s exceeds 2 min"));
    c.finish();
}

#[test]
fn criterion_4_efron_stein() {
    let mut c = Criterion::new(4, "operator and polynomial Efron-Stein");
    for d in [2, 3, 4] {
        for n in 1..=3 {
            let name = format!("efron_stein/d{d}/n{n}");
            let r = run_trials(&name, &cfg(d, 1000, 41), |rng, _| {
                let p = random_product(rng, d, n);
                let r = check_operator_efron_stein(&p)?;
                Ok(if n == 1 && r.holds { exact(&name, r.margin.abs(), 1e-12) } else { r })
            })
            .unwrap();
            c.report(&r);
            for q in 1..=3 {
                let r = run_trials(&format!("schatten{q}/d{d}/n{n}"), &cfg(d, 1000, 42), |rng, _| {
                    check_polynomial_efron_stein(&random_product(rng, d, n), q)
                })
                .unwrap();
                c.report(&r);
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_5_dual_representation() {
    let mut c = Criterion::new(5, "dual representation and interpolation");
    let grid: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
    let combos = [
        (ScalarFunction::square(), Variant::Operator),
        (ScalarFunction::square(), Variant::Trace),
        (ScalarFunction::xlogx(), Variant::Trace),
    ];
    for (f, variant) in &combos {
        for d in [2, 3] {
            let name = format!("dual/{f}/{variant}/d{d}");
            let r = run_trials(&name, &cfg(d, 500, 51), |rng, _| {
                let z = sample_ensemble(rng, d, 3, SPECTRUM.0, SPECTRUM.1)?;
                let t = sample_coupled(rng, &z, SPECTRUM.0, SPECTRUM.1)?;
                let gap = dual_representation_gap(f, &z, &t, *variant)?;
                if !gap.holds || gap.margin < -1e-9 {
                    return Ok(gap);
                }
                let at_z = dual_representation_gap(f, &z, &z, *variant)?;
                if at_z.margin.abs() > 1e-12 {
                    return Ok(exact("dual/t_equals_z", at_z.margin.abs(), 1e-12));
                }
                interpolation_derivative_scan(f, &z, &t, &grid, *variant)
            })
            .unwrap();
            c.report(&r);
        }
    }
    c.finish();
}

/// `(Φ'', Φ''', Φ'''')` in closed form.
fn higher_derivatives(name: &str, x: f64) -> (f64, f64, f64) {
    match name {
        "square" => (2.0, 0.0, 0.0),
        "xlogx" => (1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)),
        "power:1.5" => (0.75 * x.powf(-0.5), -0.375 * x.powf(-1.5), 0.5625 * x.powf(-2.5)),
        "quartic" => (12.0 * x * x, 24.0 * x, 24.0),
        "exp" => (x.exp(), x.exp(), x.exp()),
        other => panic!("no closed form for {other}"),
    }
}

#[test]
fn criterion_6_characterisations() {
    let mut c = Criterion::new(6, "characterisation items co-occur");
    let kinds = [FunctionalKind::BregmanA, FunctionalKind::MapB, FunctionalKind::MapC, FunctionalKind::GapFt];
    for f in in_class() {
        let mut variants = vec![Variant::Trace];
        if f.has_tag(Variant::Operator.required_class()) {
            variants.push(Variant::Operator);
        }
        for &variant in &variants {
            for d in [2, 3] {
                let shared = cfg(d, 1000, 61);
                for kind in kinds {
                    let t = (kind == FunctionalKind::GapFt).then_some(0.3);
                    let func = BivariateFunctional::new(kind, f.clone(), t, variant).unwrap();
                    c.report(&joint_convexity_test(&func, &shared, &DEFAULT_LAMBDAS).unwrap());
                }
                c.report(&conditional_jensen_sweep(&f, &shared, variant, [3, 3]).unwrap());
            }
        }
    }

    let quartic = ScalarFunction::quartic();
    let r = counterexample_search(
        &quartic,
        &SearchConfig::new(SearchTarget::Convexity(FunctionalKind::MapC), 1, 10_000, 62),
    )
    .unwrap();
    c.require(!r.holds && r.trials <= 10_000, || format!("quartic map_C not falsified: {r:?}"));
    let exp = ScalarFunction::exp();
    let r = counterexample_search(&exp, &SearchConfig::new(SearchTarget::ConditionA, 1, 10_000, 63)).unwrap();
    c.require(!r.holds && r.trials <= 10_000, || format!("exp condition (a) not falsified: {r:?}"));

    for f in in_class() {
        for d in 1..=3 {
            c.report(&condition_e_sweep(&f, &cfg(d, 300, 64)).unwrap());
        }
    }
    let mut outside = in_class();
    outside.extend([ScalarFunction::quartic(), ScalarFunction::exp()]);
    for f in &outside {
        let name = f.name();
        let r = run_trials("condition_e_sign", &cfg(1, 200, 65), |rng, _| {
            let a = sample_spectrum_in(rng, 1, SPECTRUM.0, SPECTRUM.1);
            let h = sample_direction(rng, 1);
            let k = sample_direction(rng, 1);
            let (lhs, rhs) = condition_e_sides(f, &a, &h, &k)?;
            let (d2, d3, d4) = higher_derivatives(&name, a.max_eigenvalue());
            let oracle = d4 * d2 - 2.0 * d3 * d3;
            let zero = 1e-12 * (d4 * d2).abs().max(d3 * d3);
            let margin = lhs - rhs;
            let ok = if oracle.abs() <= zero {
                margin.abs() <= CONDITION_E_REL_TOL * (lhs.abs() + rhs.abs()) + f64::MIN_POSITIVE
            } else {
                margin.signum() == oracle.signum()
            };
            Ok(exact(&format!("condition_e_sign/{name}"), if ok { 0.0 } else { 1.0 }, 0.0))
        })
        .unwrap();
        c.report(&r);
    }
    c.finish();
}

#[test]
fn criterion_7_channel_monotonicity() {
    let mut c = Criterion::new(7, "entropies decrease under unital channels");
    let combos = [
        (ScalarFunction::square(), Variant::Trace),
        (ScalarFunction::xlogx(), Variant::Trace),
        (ScalarFunction::square(), Variant::Operator),
    ];
    for (f, variant) in &combos {
        for d in [2, 3] {
            c.report(&monotonicity_sweep(f, &cfg(d, 1000, 71), *variant, 3, 3).unwrap());
            let name = format!("monotonicity_unitary/{variant}/{f}/d{d}");
            let r = run_trials(&name, &cfg(d, 1000, 72), |rng, _| {
                let n = KrausChannel::unitary(haar_unitary(rng, d))?;
                let e = sample_ensemble(rng, d, 3, SPECTRUM.0, SPECTRUM.1)?;
                let m = check_monotonicity(f, &n, &e, *variant, false)?;
                Ok(exact(&name, m.margin.abs(), 1e-10))
            })
            .unwrap();
            c.report(&r);
        }
    }
    c.finish();
}

struct Scalar {
    phi: fn(f64) -> f64,
    dphi: fn(f64) -> f64,
    d2phi: fn(f64) -> f64,
}

fn scalar_oracle(name: &str) -> Scalar {
    match name {
        "square" => Scalar { phi: |x| x * x, dphi: |x| 2.0 * x, d2phi: |_| 2.0 },
        "xlogx" => Scalar { phi: |x| x * x.ln(), dphi: |x| x.ln() + 1.0, d2phi: |x| 1.0 / x },
        "power:1.5" => Scalar { phi: |x| x.powf(1.5), dphi: |x| 1.5 * x.sqrt(), d2phi: |x| 0.75 / x.sqrt() },
        other => panic!("no scalar oracle for {other}"),
    }
}

fn s(m: &HermitianMatrix) -> f64 {
    m.as_matrix()[(0, 0)].re
}

fn mean(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(w, x)| w * x).sum()
}

fn scalar_entropy(o: &Scalar, w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(w, &x)| w * (o.phi)(x)).sum::<f64>() - (o.phi)(mean(w, x))
}

fn scalar_ensemble(e: &MatrixEnsemble) -> (Vec<f64>, Vec<f64>) {
    (e.weights().to_vec(), e.atoms().iter().map(s).collect())
}

/// All tuples of the product space, with their weights.
fn tuples(p: &ProductEnsemble) -> Vec<(Vec<usize>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for factor in p.factors() {
        out = out
            .into_iter()
            .flat_map(|(t, w)| {
                factor.iter().enumerate().map(move |(x, &fw)| {
                    let mut t = t.clone();
                    t.push(x);
                    (t, w * fw)
                })
            })
            .collect();
    }
    out
}

fn zval(p: &ProductEnsemble, t: &[usize]) -> f64 {
    s(p.z(t).unwrap())
}

/// `E[H⁽ⁱ⁾]`: entropy over coordinate `i` averaged over the others.
fn scalar_conditional(o: &Scalar, p: &ProductEnsemble, i: usize) -> f64 {
    let fi = &p.factors()[i];
    tuples(p)
        .into_iter()
        .filter(|(t, _)| t[i] == 0)
        .map(|(t, w)| {
            let rest = w / fi[0];
            let xs: Vec<f64> = (0..fi.len())
                .map(|x| {
                    let mut t = t.clone();
                    t[i] = x;
                    zval(p, &t)
                })
                .collect();
            rest * scalar_entropy(o, fi, &xs)
        })
        .sum()
}

fn scalar_joint(p: &ProductEnsemble) -> (Vec<f64>, Vec<f64>) {
    tuples(p).into_iter().map(|(t, w)| (w, zval(p, &t))).unzip()
}

fn scalar_dual(o: &Scalar, w: &[f64], z: &[f64], t: &[f64]) -> f64 {
    let (ez, et) = (mean(w, z), mean(w, t));
    let local: f64 = w.iter().zip(z).zip(t).map(|((w, z), t)| w * (o.dphi)(*t) * (z - t)).sum();
    local - (o.dphi)(et) * (ez - et) + scalar_entropy(o, w, t)
}

fn scalar_functional(o: &Scalar, kind: FunctionalKind, t: f64, u: f64, v: f64) -> f64 {
    match kind {
        FunctionalKind::BregmanA => (o.phi)(u + v) - (o.phi)(u) - (o.dphi)(u) * v,
        FunctionalKind::MapB => ((o.dphi)(u + v) - (o.dphi)(u)) * v,
        FunctionalKind::MapC => (o.d2phi)(u) * v * v,
        FunctionalKind::GapFt => t * (o.phi)(u) + (1.0 - t) * (o.phi)(v) - (o.phi)(t * u + (1.0 - t) * v),
    }
}

fn agree(name: &str, lib: f64, oracle: f64) -> VerificationReport {
    exact(name, (lib - oracle).abs() / (1.0 + oracle.abs()), 1e-10)
        .with_witness(serde_json::json!({ "check": name, "library": lib, "oracle": oracle }))
}

fn worst(rs: Vec<VerificationReport>) -> VerificationReport {
    let mut it = rs.into_iter();
    let first = it.next().expect("at least one report");
    it.fold(first, |w, r| if r.normalized_margin() < w.normalized_margin() { r } else { w })
}

#[test]
fn criterion_8_classical_reduction() {
    let mut c = Criterion::new(8, "one-dimensional checks match scalar oracles");
    let c1 = cfg(1, 300, 81);
    let kinds = [FunctionalKind::BregmanA, FunctionalKind::MapB, FunctionalKind::MapC, FunctionalKind::GapFt];
    for f in in_class() {
        let o = scalar_oracle(&f.name());
        let r = run_trials(&format!("reduction/{f}"), &c1, |rng, _| {
            let mut out = Vec::new();
            let (lo, hi) = SPECTRUM;

            let e = sample_ensemble(rng, 1, 4, lo, hi)?;
            let (w, x) = scalar_ensemble(&e);
            out.push(agree("entropy", matrix_phi_entropy(&f, &e)?, scalar_entropy(&o, &w, &x)));

            let n = rng.random_range(1..=3);
            let p = random_product(rng, 1, n);
            let (jw, jx) = scalar_joint(&p);
            let total = scalar_entropy(&o, &jw, &jx);
            let parts: f64 = (0..n).map(|i| scalar_conditional(&o, &p, i)).sum();
            let sub = check_subadditivity(&f, &p, Variant::Trace, false)?;
            out.push(agree("subadditivity", sub.margin, parts - total));

            let sq = scalar_oracle("square");
            let es: f64 = (0..n)
                .map(|i| {
                    tuples(&p)
                        .into_iter()
                        .map(|(t, wt)| {
                            p.factors()[i]
                                .iter()
                                .enumerate()
                                .map(|(xi, &wi)| {
                                    let mut r = t.clone();
                                    r[i] = xi;
                                    0.5 * wt * wi * (zval(&p, &t) - zval(&p, &r)).powi(2)
                                })
                                .sum::<f64>()
                        })
                        .sum::<f64>()
                })
                .sum();
            let var = scalar_entropy(&sq, &jw, &jx);
            out.push(agree("efron_stein", check_operator_efron_stein(&p)?.margin, es - var));

            let pair = sample_product(rng, 1, &[3, 3], lo, hi)?;
            let lhs = scalar_conditional(&o, &pair, 1);
            let f0 = &pair.factors()[0];
            let f1 = &pair.factors()[1];
            let averaged: Vec<f64> =
                (0..f1.len()).map(|x2| (0..f0.len()).map(|x1| f0[x1] * zval(&pair, &[x1, x2])).sum()).collect();
            let cj = conditional_jensen_check(&f, &pair, Variant::Trace)?;
            out.push(agree("conditional_jensen", cj.margin, lhs - scalar_entropy(&o, f1, &averaged)));

            let t = sample_coupled(rng, &e, lo, hi)?;
            let (_, tx) = scalar_ensemble(&t);
            let gap = dual_representation_gap(&f, &e, &t, Variant::Trace)?;
            out.push(agree("dual", gap.margin, scalar_entropy(&o, &w, &x) - scalar_dual(&o, &w, &x, &tx)));
            let sgrid = [0.0, 0.3, 1.0];
            for (sv, m) in sgrid.iter().zip(interpolation_values(&f, &e, &t, &sgrid)?) {
                let ts: Vec<f64> = x.iter().zip(&tx).map(|(z, t)| (1.0 - sv) * z + sv * t).collect();
                out.push(agree("interpolation", s(&m), scalar_dual(&o, &w, &x, &ts)));
            }

            let (u1, u2) = (rng.random_range(lo..hi), rng.random_range(lo..hi));
            let (w1, w2) = (rng.random_range(lo..hi), rng.random_range(lo..hi));
            let l = rng.random_range(0.0..1.0);
            for kind in kinds {
                let tp = (kind == FunctionalKind::GapFt).then_some(0.3);
                let func = BivariateFunctional::new(kind, f.clone(), tp, Variant::Trace)?;
                let (v1, v2) = if kind == FunctionalKind::GapFt { (w1, w2) } else { (w1 - u1, w2 - u2) };
                let m = |x: f64| HermitianMatrix::diag(&[x]);
                let lib = eval_functional(&func, &m(u1), &m(v1))?.as_scalar().unwrap();
                let f1v = scalar_functional(&o, kind, 0.3, u1, v1);
                out.push(agree("functional", lib, f1v));
                let f2v = scalar_functional(&o, kind, 0.3, u2, v2);
                let flv = scalar_functional(&o, kind, 0.3, l * u1 + (1.0 - l) * u2, l * v1 + (1.0 - l) * v2);
                let conv = convexity_at(&func, (&m(u1), &m(v1)), (&m(u2), &m(v2)), l)?;
                out.push(agree("joint_convexity", conv.margin, l * f1v + (1.0 - l) * f2v - flv));
            }

            let h = rng.random_range(-1.0..1.0);
            let q = |a: f64| h * h / (o.d2phi)(a);
            let ca = condition_a_at(&f, &HermitianMatrix::diag(&[u1]), &HermitianMatrix::diag(&[u2]), &HermitianMatrix::diag(&[h]), l)?;
            out.push(agree("condition_a", ca.margin, q(l * u1 + (1.0 - l) * u2) - l * q(u1) - (1.0 - l) * q(u2)));

            let k = rng.random_range(-1.0..1.0);
            let (d2, d3, d4) = higher_derivatives(&f.name(), u1);
            let (lhs, rhs) = condition_e_sides(&f, &HermitianMatrix::diag(&[u1]), &HermitianMatrix::diag(&[h]), &HermitianMatrix::diag(&[k]))?;
            let hk = h * h * k * k;
            out.push(agree("condition_e/lhs", lhs, hk * d4 / (d2 * d2)));
            out.push(agree("condition_e/rhs", rhs, 2.0 * hk * d3 * d3 / (d2 * d2 * d2)));

            let aw = random_weights(rng, 3);
            let aa: Vec<f64> = (0..3).map(|_| rng.random_range(lo..hi)).collect();
            let ax: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let pairs = PairEnsemble::new(
                aw.clone(),
                aa.iter().map(|&a| HermitianMatrix::diag(&[a])).collect(),
                ax.iter().map(|&x| HermitianMatrix::diag(&[x])).collect(),
            )?;
            let lemma: f64 = aw.iter().zip(&aa).zip(&ax).map(|((w, a), x)| w * x * x * (o.d2phi)(*a)).sum::<f64>()
                - mean(&aw, &ax).powi(2) * (o.d2phi)(mean(&aw, &aa));
            out.push(agree("convexity_lemma", convexity_lemma_check(&f, &pairs)?.margin, lemma));

            let ch = KrausChannel::unitary(haar_unitary(rng, 1))?;
            out.push(agree("monotonicity", check_monotonicity(&f, &ch, &e, Variant::Trace, false)?.margin, 0.0));
            Ok(worst(out))
        })
        .unwrap();
        c.report(&r);
    }
    c.finish();
}

#[test]
fn criterion_9_reproducibility() {
    let mut c = Criterion::new(9, "suite reports identical across thread counts");
    let config = RunConfig { seed: 9, ..RunConfig::default() };
    let serial = run_suite_with_threads(&config, Some(1)).unwrap().without_timing();
    let parallel = run_suite_with_threads(&config, Some(4)).unwrap().without_timing();
    let a = serde_json::to_vec(&serial).unwrap();
    let b = serde_json::to_vec(&parallel).unwrap();
    c.require(a == b, || "serial and parallel reports differ".into());
    let again = run_suite_with_threads(&config, Some(3)).unwrap().without_timing();
    c.require(serde_json::to_vec(&again).unwrap() == a, || "rerun differs".into());
    c.finish();
}
