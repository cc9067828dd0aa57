//! Catalog of scalar functions Φ with analytic derivatives of every order,
//! membership tags for the entropy classes, and divided differences.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Derivative evaluators of `xlogx` and fractional powers require `u ≥ DOMAIN_FLOOR`.
pub const DOMAIN_FLOOR: f64 = 1e-12;

/// Relative coincident-node threshold: nodes closer than
/// `COINCIDENT_REL * (1 + spectral diameter)` are treated as equal.
pub const COINCIDENT_REL: f64 = 1e-7;

/// The Taylor form is also used while the node cluster is narrower than this
/// fraction of its distance to a singularity.
const CLUSTER_REL: f64 = 0.25;

/// Extra Taylor terms used beyond the leading derivative; enough for
/// `CLUSTER_REL^(TAYLOR_TERMS + 1)` to sit below double precision.
const TAYLOR_TERMS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    C1,
    C2,
    C3,
    OperatorConvex,
    OutsideClass,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiKind {
    /// `a + b u`
    Affine { a: f64, b: f64 },
    Square,
    /// `u log u` with `0 log 0 = 0`.
    XLogX,
    Power { p: f64 },
    Quartic,
    Exp,
    /// Test-only `u³`; not reachable from the name parser.
    Cubic,
}

/// Real interval with open/closed ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_closed: false,
        hi_closed: false,
    };

    pub fn contains(&self, u: f64) -> bool {
        let lo_ok = if self.lo_closed { u >= self.lo } else { u > self.lo };
        let hi_ok = if self.hi_closed { u <= self.hi } else { u < self.hi };
        lo_ok && hi_ok
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// A scalar function together with its derivative tower.
///
/// `order_shift` turns the same object into a view of a derivative: the
/// `Ψ = Φ′` used throughout the derivative identities is `phi.derivative()`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFunction {
    kind: PhiKind,
    order_shift: usize,
    tags: BTreeSet<ClassTag>,
}

fn falling_factorial(p: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (p - i as f64))
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl PhiKind {
    fn deriv(&self, k: usize, u: f64) -> f64 {
        match *self {
            PhiKind::Affine { a, b } => match k {
                0 => a + b * u,
                1 => b,
                _ => 0.0,
            },
            PhiKind::Square => match k {
                0 => u * u,
                1 => 2.0 * u,
                2 => 2.0,
                _ => 0.0,
            },
            PhiKind::Cubic => match k {
                0 => u * u * u,
                1 => 3.0 * u * u,
                2 => 6.0 * u,
                3 => 6.0,
                _ => 0.0,
            },
            PhiKind::Quartic => match k {
                0 => u.powi(4),
                1 => 4.0 * u.powi(3),
                2 => 12.0 * u * u,
                3 => 24.0 * u,
                4 => 24.0,
                _ => 0.0,
            },
            PhiKind::Exp => u.exp(),
            PhiKind::XLogX => match k {
                0 => {
                    if u == 0.0 {
                        0.0
                    } else {
                        u * u.ln()
                    }
                }
                1 => u.ln() + 1.0,
                _ => {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * factorial(k - 2) / u.powi(k as i32 - 1)
                }
            },
            PhiKind::Power { p } => {
                let coeff = falling_factorial(p, k);
                if coeff == 0.0 {
                    0.0
                } else {
                    coeff * u.powf(p - k as f64)
                }
            }
        }
    }

    fn base_name(&self) -> String {
        match *self {
            PhiKind::Affine { a, b } => format!("affine:{a}:{b}"),
            PhiKind::Square => "square".into(),
            PhiKind::XLogX => "xlogx".into(),
            PhiKind::Power { p } => format!("power:{p}"),
            PhiKind::Quartic => "quartic".into(),
            PhiKind::Exp => "exp".into(),
            PhiKind::Cubic => "cubic".into(),
        }
    }

    fn half_line(&self) -> bool {
        matches!(self, PhiKind::XLogX | PhiKind::Power { .. })
    }

    /// Whether the `k`-th derivative blows up at 0.
    fn singular_at_zero(&self, k: usize) -> bool {
        match *self {
            PhiKind::XLogX => k >= 1,
            PhiKind::Power { p } => {
                let e = p - k as f64;
                e < 0.0 && falling_factorial(p, k) != 0.0
            }
            _ => false,
        }
    }
}

impl ScalarFunction {
    fn with(kind: PhiKind, tags: &[ClassTag]) -> Self {
        Self {
            kind,
            order_shift: 0,
            tags: tags.iter().copied().collect(),
        }
    }

    pub fn affine(a: f64, b: f64) -> Self {
        use ClassTag::*;
        Self::with(PhiKind::Affine { a, b }, &[C1, C2, C3, OperatorConvex])
    }

    pub fn square() -> Self {
        use ClassTag::*;
        Self::with(PhiKind::Square, &[C1, C2, C3, OperatorConvex])
    }

    pub fn xlogx() -> Self {
        use ClassTag::*;
        Self::with(PhiKind::XLogX, &[C1, C2])
    }

    /// `u^p` for `p ∈ [1, 2]`.
    pub fn power(p: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "power exponent {p} is outside [1, 2]; use power_outside_class to override"
            )));
        }
        use ClassTag::*;
        let mut tags = vec![C1, C2];
        if p == 1.0 || p == 2.0 {
            tags.extend([C3, OperatorConvex]);
        } else {
            // u^p is operator convex on [0, ∞) for p in [1, 2]
            tags.push(OperatorConvex);
        }
        Ok(Self::with(PhiKind::Power { p }, &tags))
    }

    /// Any positive exponent, tagged outside every class.
    pub fn power_outside_class(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("power exponent must be positive, got {p}")));
        }
        Ok(Self::with(PhiKind::Power { p }, &[ClassTag::OutsideClass]))
    }

    pub fn quartic() -> Self {
        Self::with(PhiKind::Quartic, &[ClassTag::OutsideClass])
    }

    pub fn exp() -> Self {
        Self::with(PhiKind::Exp, &[ClassTag::OutsideClass])
    }

    /// `u³`, used only as a test function with a nonzero third derivative.
    pub fn cubic() -> Self {
        Self::with(PhiKind::Cubic, &[ClassTag::OutsideClass])
    }

    /// Builds a catalog entry from its name and parameters.
    pub fn builtin(name: &str, params: &[f64], allow_outside_class: bool) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "`{name}` takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        match name {
            "affine" => {
                want(2)?;
                Ok(Self::affine(params[0], params[1]))
            }
            "square" => want(0).map(|_| Self::square()),
            "xlogx" => want(0).map(|_| Self::xlogx()),
            "quartic" => want(0).map(|_| Self::quartic()),
            "exp" => want(0).map(|_| Self::exp()),
            "power" => {
                want(1)?;
                match Self::power(params[0]) {
                    Ok(f) => Ok(f),
                    Err(e) if !allow_outside_class => Err(e),
                    Err(_) => Self::power_outside_class(params[0]),
                }
            }
            other => Err(Error::InvalidParameter(format!("unknown function `{other}`"))),
        }
    }

    /// Parses `"square"`, `"xlogx"`, `"power:1.5"`, `"affine:2:3"`, `"quartic"`, `"exp"`.
    pub fn parse(spec: &str, allow_outside_class: bool) -> Result<Self> {
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default().trim();
        let params = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad parameter `{p}` in `{spec}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::builtin(name, &params, allow_outside_class)
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    pub fn name(&self) -> String {
        match self.order_shift {
            0 => self.kind.base_name(),
            1 => format!("d({})", self.kind.base_name()),
            k => format!("d{k}({})", self.kind.base_name()),
        }
    }

    pub fn tags(&self) -> &BTreeSet<ClassTag> {
        &self.tags
    }

    pub fn has_tag(&self, tag: ClassTag) -> bool {
        self.tags.contains(&tag)
    }

    pub fn is_outside_class(&self) -> bool {
        self.has_tag(ClassTag::OutsideClass)
    }

    /// True for `Φ(u) = a + bu` itself (not for derivative views).
    pub fn is_affine(&self) -> bool {
        self.order_shift == 0 && matches!(self.kind, PhiKind::Affine { .. })
    }

    /// The derivative view `Φ′` (the `Ψ` of the derivative identities).
    pub fn derivative(&self) -> Self {
        Self {
            kind: self.kind,
            order_shift: self.order_shift + 1,
            tags: BTreeSet::new(),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        self.kind.deriv(self.order_shift, u)
    }

    /// `k`-th derivative of this function (any order).
    pub fn deriv(&self, k: usize, u: f64) -> f64 {
        self.kind.deriv(self.order_shift + k, u)
    }

    pub fn eval_0(&self, u: f64) -> f64 {
        self.deriv(0, u)
    }
    pub fn eval_1(&self, u: f64) -> f64 {
        self.deriv(1, u)
    }
    pub fn eval_2(&self, u: f64) -> f64 {
        self.deriv(2, u)
    }
    pub fn eval_3(&self, u: f64) -> f64 {
        self.deriv(3, u)
    }
    pub fn eval_4(&self, u: f64) -> f64 {
        self.deriv(4, u)
    }

    /// Domain on which the function value is defined.
    pub fn value_domain(&self) -> Interval {
        if !self.kind.half_line() {
            return Interval::REAL_LINE;
        }
        let lo = if self.kind.singular_at_zero(self.order_shift) {
            DOMAIN_FLOOR
        } else {
            0.0
        };
        Interval {
            lo,
            hi: f64::INFINITY,
            lo_closed: true,
            hi_closed: false,
        }
    }

    /// Domain on which derivatives (hence divided differences) are evaluated.
    pub fn derivative_domain(&self) -> Interval {
        if !self.kind.half_line() {
            return Interval::REAL_LINE;
        }
        let lo = if self.kind.singular_at_zero(self.order_shift + 1) {
            DOMAIN_FLOOR
        } else {
            0.0
        };
        Interval {
            lo,
            hi: f64::INFINITY,
            lo_closed: true,
            hi_closed: false,
        }
    }

    fn domain_error(&self, u: f64, dom: Interval) -> Error {
        Error::OutsideDomain {
            function: self.name(),
            eigenvalue: u,
            domain: dom.to_string(),
        }
    }

    pub fn check_value_domain(&self, u: f64) -> Result<()> {
        let dom = self.value_domain();
        if dom.contains(u) {
            Ok(())
        } else {
            Err(self.domain_error(u, dom))
        }
    }

    pub fn check_derivative_domain(&self, u: f64) -> Result<()> {
        let dom = self.derivative_domain();
        if dom.contains(u) {
            Ok(())
        } else {
            Err(self.domain_error(u, dom))
        }
    }

    /// Scale on which Taylor expansions about `m` converge quickly.
    fn analytic_radius(&self, m: f64) -> f64 {
        if self.kind.half_line() {
            m.abs()
        } else {
            1.0 + m.abs()
        }
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ScalarFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScalarFunction::parse(s, false)
    }
}

/// Complete homogeneous symmetric polynomials `h_0..=h_max` of `xs`.
fn complete_homogeneous(xs: &[f64], max: usize) -> Vec<f64> {
    let mut h = vec![0.0; max + 1];
    h[0] = 1.0;
    for &x in xs {
        for r in 1..=max {
            h[r] += x * h[r - 1];
        }
    }
    h
}

/// Divided difference over one node tuple; `coincident` is the absolute
/// threshold below which two nodes are considered equal.
pub fn divided_difference_at(f: &ScalarFunction, nodes: &[f64], coincident: f64) -> f64 {
    let mut xs = nodes.to_vec();
    xs.sort_by(f64::total_cmp);
    dd_sorted(f, &xs, coincident)
}

fn dd_sorted(f: &ScalarFunction, xs: &[f64], coincident: f64) -> f64 {
    let n = xs.len() - 1;
    if n == 0 {
        return f.value(xs[0]);
    }
    let diam = xs[n] - xs[0];
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let window = coincident.max(CLUSTER_REL * f.analytic_radius(m));
    if diam <= window {
        return dd_taylor(f, xs, m);
    }
    (dd_sorted(f, &xs[1..], coincident) - dd_sorted(f, &xs[..n], coincident)) / diam
}

/// `f[x₀..xₙ] = Σ_j f^{(j)}(m)/j! · h_{j−n}(x − m)`.
fn dd_taylor(f: &ScalarFunction, xs: &[f64], m: f64) -> f64 {
    let n = xs.len() - 1;
    let deltas: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let h = complete_homogeneous(&deltas, TAYLOR_TERMS);
    (0..=TAYLOR_TERMS)
        .map(|r| f.deriv(n + r, m) / factorial(n + r) * h[r])
        .sum()
}

/// Symmetric table of divided differences over all index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct DividedDifferenceTable {
    pub order: usize,
    pub nodes: Vec<f64>,
    /// Row-major over `order + 1` indices, each in `0..nodes.len()`.
    pub values: Vec<f64>,
}

impl DividedDifferenceTable {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.order + 1);
        let d = self.dim();
        let flat = idx.iter().fold(0, |acc, &i| acc * d + i);
        self.values[flat]
    }
}

/// Coincident-node threshold for a spectrum.
pub fn coincident_threshold(nodes: &[f64]) -> f64 {
    let (lo, hi) = nodes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    COINCIDENT_REL * (1.0 + (hi - lo))
}

pub fn divided_differences(
    f: &ScalarFunction,
    nodes: &[f64],
    order: usize,
) -> Result<DividedDifferenceTable> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!("divided-difference order must be 1..=3, got {order}")));
    }
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("no nodes".into()));
    }
    for &x in nodes {
        f.check_derivative_domain(x)?;
    }
    let d = nodes.len();
    let coincident = coincident_threshold(nodes);
    let arity = order + 1;
    let total = d.pow(arity as u32);
    let mut values = vec![0.0; total];
    let mut cache = std::collections::HashMap::new();
    let mut idx = vec![0usize; arity];
    for (flat, slot) in values.iter_mut().enumerate() {
        let mut rem = flat;
        for k in (0..arity).rev() {
            idx[k] = rem % d;
            rem /= d;
        }
        let mut key = idx.clone();
        key.sort_unstable();
        *slot = *cache.entry(key).or_insert_with_key(|key| {
            let xs: Vec<f64> = key.iter().map(|&i| nodes[i]).collect();
            divided_difference_at(f, &xs, coincident)
        });
    }
    Ok(DividedDifferenceTable {
        order,
        nodes: nodes.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: &ScalarFunction, k: usize, u: f64) -> f64 {
        // derivative k from analytic k-1 via a central difference
        let h = 1e-4 * (1.0 + u.abs());
        (f.deriv(k - 1, u + h) - f.deriv(k - 1, u - h)) / (2.0 * h)
    }

    #[test]
    fn derivative_tower_matches_finite_differences() {
        let fs = [
            ScalarFunction::square(),
            ScalarFunction::xlogx(),
            ScalarFunction::power(1.5).unwrap(),
            ScalarFunction::quartic(),
            ScalarFunction::exp(),
            ScalarFunction::affine(2.0, 3.0),
        ];
        for f in &fs {
            for &u in &[0.5, 1.0, 2.3, 4.0] {
                for k in 1..=4 {
                    let exact = f.deriv(k, u);
                    let fd = central(f, k, u);
                    let err = (exact - fd).abs() / (1.0 + exact.abs());
                    assert!(err <= 1e-5, "{f} k={k} u={u}: {exact} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn tagged_functions_are_convex_on_samples() {
        for f in [ScalarFunction::square(), ScalarFunction::xlogx(), ScalarFunction::power(1.3).unwrap()] {
            for i in 1..100 {
                assert!(f.eval_2(i as f64 * 0.05) >= 0.0);
            }
        }
    }

    #[test]
    fn catalog_examples() {
        assert_eq!(ScalarFunction::square().eval_2(-7.0), 2.0);
        assert_eq!(ScalarFunction::xlogx().eval_1(1.0), 1.0);
        let q = ScalarFunction::quartic();
        let e_gap = q.eval_4(1.0) * q.eval_2(1.0) - 2.0 * q.eval_3(1.0).powi(2);
        assert_eq!(e_gap, -864.0);
        assert!(q.is_outside_class());
        assert_eq!(ScalarFunction::xlogx().value(0.0), 0.0);
    }

    #[test]
    fn name_parsing() {
        assert_eq!(ScalarFunction::parse("power:1.5", false).unwrap(), ScalarFunction::power(1.5).unwrap());
        assert_eq!(ScalarFunction::parse("affine:2:3", false).unwrap(), ScalarFunction::affine(2.0, 3.0));
        assert!(ScalarFunction::parse("power:3", false).is_err());
        assert!(ScalarFunction::parse("power:3", true).unwrap().is_outside_class());
        assert!(ScalarFunction::parse("cubic", false).is_err());
        assert!(ScalarFunction::parse("nope", false).is_err());
        assert!(ScalarFunction::parse("square:1", false).is_err());
    }

    #[test]
    fn domains() {
        let xl = ScalarFunction::xlogx();
        assert!(xl.check_value_domain(0.0).is_ok());
        assert!(xl.check_derivative_domain(0.0).is_err());
        assert!(xl.check_derivative_domain(1e-12).is_ok());
        assert!(xl.check_value_domain(-0.1).is_err());
        assert!(ScalarFunction::exp().check_derivative_domain(-100.0).is_ok());
        // Ψ = log u + 1 has no value at 0
        assert!(xl.derivative().check_value_domain(0.0).is_err());
    }

    #[test]
    fn divided_difference_examples() {
        let sq = ScalarFunction::square();
        let t = divided_differences(&sq, &[1.0, 3.0], 1).unwrap();
        assert!((t.get(&[0, 1]) - 4.0).abs() < 1e-14);
        let t2 = divided_differences(&sq, &[0.3, 1.7, 2.2], 2).unwrap();
        assert!(t2.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let t = divided_differences(&ScalarFunction::xlogx(), &[1.0, 1.0], 1).unwrap();
        assert!(t.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!(divided_differences(&ScalarFunction::xlogx(), &[0.0, 1.0], 1).is_err());
        assert!(divided_differences(&sq, &[1.0], 4).is_err());
    }

    #[test]
    fn polynomial_tables_vanish_above_degree() {
        let nodes = [0.4, 1.1, 1.1, 3.0];
        let t = divided_differences(&ScalarFunction::affine(2.0, 3.0), &nodes, 2).unwrap();
        assert!(t.values.iter().all(|v| v.abs() < 1e-12));
        let t = divided_differences(&ScalarFunction::square(), &nodes, 3).unwrap();
        assert!(t.values.iter().all(|v| v.abs() < 1e-10));
        let t = divided_differences(&ScalarFunction::cubic(), &nodes, 3).unwrap();
        assert!(t.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn collapsed_nodes_equal_derivatives() {
        for f in [ScalarFunction::xlogx(), ScalarFunction::exp(), ScalarFunction::power(1.5).unwrap()] {
            for &l in &[0.5, 1.0, 3.0] {
                let t1 = divided_differences(&f, &[l], 1).unwrap();
                assert!((t1.values[0] - f.eval_1(l)).abs() < 1e-8);
                let t2 = divided_differences(&f, &[l], 2).unwrap();
                assert!((t2.values[0] - f.eval_2(l) / 2.0).abs() < 1e-8);
                let t3 = divided_differences(&f, &[l], 3).unwrap();
                assert!((t3.values[0] - f.eval_3(l) / 6.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tables_are_symmetric() {
        let nodes = [0.6, 1.3, 2.9, 3.7];
        let f = ScalarFunction::xlogx();
        let t = divided_differences(&f, &nodes, 3).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let a = t.get(&[i, j, k, l]);
                        let b = t.get(&[l, i, k, j]);
                        assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn continuity_across_coincident_threshold() {
        for f in [ScalarFunction::xlogx(), ScalarFunction::exp(), ScalarFunction::power(1.5).unwrap()] {
            let base = 1.7;
            let nodes_probe = [base, base + 0.5];
            let delta = coincident_threshold(&nodes_probe);
            let above = divided_difference_at(&f, &[base, base + 1.01 * delta], delta);
            let below = divided_difference_at(&f, &[base, base + 0.99 * delta], delta);
            assert!((above - below).abs() <= 1e-6 * above.abs(), "{f}: {above} vs {below}");
        }
    }

    #[test]
    fn higher_order_tables_agree_with_exact_formula_near_clusters() {
        // xlogx: f[a,b,c] for close nodes against the quotient in extended spacing
        let f = ScalarFunction::xlogx();
        let xs = [1.0, 1.0 + 3e-3, 1.0 + 7e-3];
        let v = divided_difference_at(&f, &xs, 1e-7);
        // second divided difference of u log u equals ∫ simplex 1/u; compare with a wide-node quotient
        let q01 = (f.value(xs[1]) - f.value(xs[0])) / (xs[1] - xs[0]);
        let q12 = (f.value(xs[2]) - f.value(xs[1])) / (xs[2] - xs[1]);
        let quotient = (q12 - q01) / (xs[2] - xs[0]);
        assert!((v - quotient).abs() < 1e-6);
    }
}
