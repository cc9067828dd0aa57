use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{weighted_sum, HermitianMatrix};

/// Slack on `Σ wᵢ = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Relative slack on atom positivity.
pub const PSD_REL_TOL: f64 = 1e-10;
/// Spectral floor required of ensembles fed to derivative-based checks.
pub const SPECTRAL_FLOOR: f64 = 1e-3;

fn check_weights(ws: &[f64], what: &str) -> Result<()> {
    if ws.is_empty() {
        return Err(Error::InvalidEnsemble(format!("{what} has no outcomes")));
    }
    if let Some(w) = ws.iter().find(|w| !(**w >= 0.0 && **w <= 1.0)) {
        return Err(Error::InvalidEnsemble(format!("{what} has weight {w} outside [0, 1]")));
    }
    let total: f64 = ws.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidEnsemble(format!("{what} weights sum to {total}, not 1")));
    }
    Ok(())
}

fn check_psd(m: &HermitianMatrix, label: &str) -> Result<()> {
    let lo = m.min_eigenvalue();
    if lo < -PSD_REL_TOL * (1.0 + m.spectral_norm()) {
        return Err(Error::InvalidEnsemble(format!(
            "{label} is not positive semi-definite (min eigenvalue {lo:e})"
        )));
    }
    Ok(())
}

/// Finitely supported random PSD matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleJson", into = "EnsembleJson")]
pub struct MatrixEnsemble {
    dim: usize,
    weights: Vec<f64>,
    atoms: Vec<HermitianMatrix>,
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    w: f64,
    m: HermitianMatrix,
}

#[derive(Serialize, Deserialize)]
struct EnsembleJson {
    dim: usize,
    atoms: Vec<AtomJson>,
}

impl TryFrom<EnsembleJson> for MatrixEnsemble {
    type Error = Error;
    fn try_from(j: EnsembleJson) -> Result<Self> {
        let e = MatrixEnsemble::new(j.atoms.into_iter().map(|a| (a.w, a.m)).collect())?;
        if e.dim != j.dim {
            return Err(Error::DimensionMismatch {
                expected: j.dim,
                got: e.dim,
            });
        }
        Ok(e)
    }
}

impl From<MatrixEnsemble> for EnsembleJson {
    fn from(e: MatrixEnsemble) -> Self {
        EnsembleJson {
            dim: e.dim,
            atoms: e.weights.into_iter().zip(e.atoms).map(|(w, m)| AtomJson { w, m }).collect(),
        }
    }
}

impl MatrixEnsemble {
    pub fn new(atoms: Vec<(f64, HermitianMatrix)>) -> Result<Self> {
        let (weights, atoms): (Vec<f64>, Vec<HermitianMatrix>) = atoms.into_iter().unzip();
        check_weights(&weights, "ensemble")?;
        let dim = atoms[0].dim();
        for (i, a) in atoms.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.dim(),
                });
            }
            check_psd(a, &format!("atom {i}"))?;
        }
        Ok(Self { dim, weights, atoms })
    }

    pub fn deterministic(a: HermitianMatrix) -> Result<Self> {
        Self::new(vec![(1.0, a)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> &[HermitianMatrix] {
        &self.atoms
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &HermitianMatrix)> {
        self.weights.iter().copied().zip(self.atoms.iter())
    }

    /// `E Z = Σ wᵢ Aᵢ`.
    pub fn expectation(&self) -> HermitianMatrix {
        weighted_sum(self.iter())
    }

    /// `E g(Z)` for a matrix-valued `g`.
    pub fn expect_with<F>(&self, g: F) -> Result<HermitianMatrix>
    where
        F: Fn(&HermitianMatrix) -> Result<HermitianMatrix>,
    {
        let images = self.atoms.iter().map(&g).collect::<Result<Vec<_>>>()?;
        Ok(weighted_sum(self.weights.iter().copied().zip(images.iter())))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.atoms.iter().map(|a| a.min_eigenvalue()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.spectral_norm()).fold(0.0, f64::max)
    }

    /// Same weights, atoms transformed by `g` (validated again).
    pub fn map<F>(&self, g: F) -> Result<Self>
    where
        F: Fn(&HermitianMatrix) -> HermitianMatrix,
    {
        Self::new(self.iter().map(|(w, a)| (w, g(a))).collect())
    }

    /// Whether `other` lives on the same sample space (identical weights).
    pub fn is_coupled_with(&self, other: &MatrixEnsemble) -> bool {
        self.dim == other.dim && self.weights == other.weights
    }
}

/// `Z = z(X₁, …, Xₙ)` for independent finitely supported `Xᵢ`.
///
/// Outcome tuples are indexed row-major (last factor fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProductJson", into = "ProductJson")]
pub struct ProductEnsemble {
    dim: usize,
    factors: Vec<Vec<f64>>,
    z: Vec<HermitianMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ProductJson {
    factors: Vec<Vec<f64>>,
    z: BTreeMap<String, HermitianMatrix>,
}

fn parse_key(key: &str) -> Result<Vec<usize>> {
    key.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidEnsemble(format!("bad outcome key `{key}`")))
        })
        .collect()
}

impl TryFrom<ProductJson> for ProductEnsemble {
    type Error = Error;
    fn try_from(j: ProductJson) -> Result<Self> {
        let sizes: Vec<usize> = j.factors.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        let mut slots: Vec<Option<HermitianMatrix>> = vec![None; total];
        for (k, m) in j.z {
            let tuple = parse_key(&k)?;
            let flat = flat_index(&sizes, &tuple)?;
            slots[flat] = Some(m);
        }
        let mut z = Vec::with_capacity(total);
        for (flat, s) in slots.into_iter().enumerate() {
            match s {
                Some(m) => z.push(m),
                None => {
                    let key = unflatten(&sizes, flat).iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                    return Err(Error::InvalidEnsemble(format!("z is missing outcome `{key}`")));
                }
            }
        }
        ProductEnsemble::new(j.factors, z)
    }
}

impl From<ProductEnsemble> for ProductJson {
    fn from(p: ProductEnsemble) -> Self {
        let sizes = p.sizes();
        let z = p
            .z
            .into_iter()
            .enumerate()
            .map(|(flat, m)| {
                let key = unflatten(&sizes, flat).iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                (key, m)
            })
            .collect();
        ProductJson { factors: p.factors, z }
    }
}

fn flat_index(sizes: &[usize], tuple: &[usize]) -> Result<usize> {
    if tuple.len() != sizes.len() {
        return Err(Error::InvalidEnsemble(format!(
            "outcome tuple has {} entries, expected {}",
            tuple.len(),
            sizes.len()
        )));
    }
    let mut flat = 0;
    for (k, (&i, &s)) in tuple.iter().zip(sizes).enumerate() {
        if i >= s {
            return Err(Error::InvalidEnsemble(format!("factor {k} has no outcome {i}")));
        }
        flat = flat * s + i;
    }
    Ok(flat)
}

fn unflatten(sizes: &[usize], mut flat: usize) -> Vec<usize> {
    let mut t = vec![0; sizes.len()];
    for k in (0..sizes.len()).rev() {
        t[k] = flat % sizes[k];
        flat /= sizes[k];
    }
    t
}

/// Which coordinates a conditional expectation integrates out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrateOver {
    /// `Eᵢ`: average over factor `i`, the others held fixed.
    #[default]
    FactorI,
    /// Average over every factor except `i`, which is held fixed.
    Complement,
}

impl ProductEnsemble {
    pub fn new(factors: Vec<Vec<f64>>, z: Vec<HermitianMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidEnsemble("product ensemble needs at least one factor".into()));
        }
        for (k, f) in factors.iter().enumerate() {
            check_weights(f, &format!("factor {k}"))?;
        }
        let total: usize = factors.iter().map(Vec::len).product();
        if z.len() != total {
            return Err(Error::InvalidEnsemble(format!("z has {} images, expected {total}", z.len())));
        }
        let dim = z[0].dim();
        for (flat, m) in z.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            check_psd(m, &format!("z{:?}", unflatten(&factors.iter().map(Vec::len).collect::<Vec<_>>(), flat)))?;
        }
        Ok(Self { dim, factors, z })
    }

    /// Builds `z` from a closure over outcome tuples.
    pub fn from_fn<F>(factors: Vec<Vec<f64>>, z: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> HermitianMatrix,
    {
        let sizes: Vec<usize> = factors.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        let images = (0..total).map(|flat| z(&unflatten(&sizes, flat))).collect();
        Self::new(factors, images)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(Vec::len).collect()
    }

    pub fn z(&self, tuple: &[usize]) -> Result<&HermitianMatrix> {
        Ok(&self.z[flat_index(&self.sizes(), tuple)?])
    }

    pub fn images(&self) -> &[HermitianMatrix] {
        &self.z
    }

    /// All outcome tuples with their probabilities, in storage order.
    pub fn outcomes(&self) -> Vec<(Vec<usize>, f64)> {
        let sizes = self.sizes();
        (0..self.z.len())
            .map(|flat| {
                let t = unflatten(&sizes, flat);
                let w = t.iter().enumerate().fold(1.0, |acc, (k, &i)| acc * self.factors[k][i]);
                (t, w)
            })
            .collect()
    }

    /// Law of `Z` as a plain ensemble.
    pub fn joint(&self) -> MatrixEnsemble {
        MatrixEnsemble {
            dim: self.dim,
            weights: self.outcomes().into_iter().map(|(_, w)| w).collect(),
            atoms: self.z.clone(),
        }
    }

    fn check_factor(&self, i: usize) -> Result<()> {
        if i >= self.n_factors() {
            return Err(Error::InvalidParameter(format!(
                "factor index {i} out of range for {} factors",
                self.n_factors()
            )));
        }
        Ok(())
    }

    /// Tuples of the factors other than `i`, with probabilities.
    pub fn rest_outcomes(&self, i: usize) -> Result<Vec<(Vec<usize>, f64)>> {
        self.check_factor(i)?;
        let sizes: Vec<usize> = self.sizes().into_iter().enumerate().filter(|(k, _)| *k != i).map(|(_, s)| s).collect();
        let total: usize = sizes.iter().product();
        Ok((0..total)
            .map(|flat| {
                let t = unflatten(&sizes, flat);
                let w = t.iter().enumerate().fold(1.0, |acc, (k, &j)| {
                    let factor = if k < i { k } else { k + 1 };
                    acc * self.factors[factor][j]
                });
                (t, w)
            })
            .collect())
    }

    fn insert(i: usize, rest: &[usize], xi: usize) -> Vec<usize> {
        let mut t = rest.to_vec();
        t.insert(i, xi);
        t
    }

    /// Law of `Z` over factor `i` with `X₋ᵢ = rest` held fixed.
    pub fn slice_factor(&self, i: usize, rest: &[usize]) -> Result<MatrixEnsemble> {
        self.check_factor(i)?;
        if rest.len() + 1 != self.n_factors() {
            return Err(Error::InvalidParameter(format!(
                "fixed tuple has {} entries, expected {}",
                rest.len(),
                self.n_factors() - 1
            )));
        }
        let mut weights = Vec::new();
        let mut atoms = Vec::new();
        for (xi, &w) in self.factors[i].iter().enumerate() {
            weights.push(w);
            atoms.push(self.z(&Self::insert(i, rest, xi))?.clone());
        }
        Ok(MatrixEnsemble {
            dim: self.dim,
            weights,
            atoms,
        })
    }

    /// Law of `Z` over every factor but `i`, with `Xᵢ = xi` held fixed.
    pub fn slice_complement(&self, i: usize, xi: usize) -> Result<MatrixEnsemble> {
        self.check_factor(i)?;
        if xi >= self.factors[i].len() {
            return Err(Error::InvalidParameter(format!("factor {i} has no outcome {xi}")));
        }
        let mut weights = Vec::new();
        let mut atoms = Vec::new();
        for (rest, w) in self.rest_outcomes(i)? {
            weights.push(w);
            atoms.push(self.z(&Self::insert(i, &rest, xi))?.clone());
        }
        Ok(MatrixEnsemble {
            dim: self.dim,
            weights,
            atoms,
        })
    }

    /// `(slice, outer weight)` pairs whose weighted sum of slice functionals
    /// is the expected conditional functional.
    pub fn conditional_slices(&self, i: usize, over: IntegrateOver) -> Result<Vec<(MatrixEnsemble, f64)>> {
        match over {
            IntegrateOver::FactorI => self
                .rest_outcomes(i)?
                .into_iter()
                .map(|(rest, w)| Ok((self.slice_factor(i, &rest)?, w)))
                .collect(),
            IntegrateOver::Complement => self.factors[i]
                .iter()
                .enumerate()
                .map(|(xi, &w)| Ok((self.slice_complement(i, xi)?, w)))
                .collect(),
        }
    }

    /// Conditional expectation `Eᵢ Z` as a function of `X₋ᵢ`, listed in
    /// [`ProductEnsemble::rest_outcomes`] order.
    pub fn conditional_expectation(&self, i: usize) -> Result<Vec<HermitianMatrix>> {
        self.rest_outcomes(i)?
            .into_iter()
            .map(|(rest, _)| Ok(self.slice_factor(i, &rest)?.expectation()))
            .collect()
    }

    /// `Z` with factor `i` replaced by an independent copy, as a function of
    /// the original tuple and the resampled value.
    pub fn resampled(&self, tuple: &[usize], i: usize, xi: usize) -> Result<&HermitianMatrix> {
        let mut t = tuple.to_vec();
        t[i] = xi;
        self.z(&t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e0() -> MatrixEnsemble {
        MatrixEnsemble::new(vec![(0.5, HermitianMatrix::diag(&[1.0, 2.0])), (0.5, HermitianMatrix::diag(&[3.0, 4.0]))])
            .unwrap()
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(e0().expectation(), HermitianMatrix::diag(&[2.0, 3.0]));
        let single = MatrixEnsemble::deterministic(HermitianMatrix::diag(&[0.3, 7.0])).unwrap();
        assert_eq!(single.expectation(), HermitianMatrix::diag(&[0.3, 7.0]));
    }

    #[test]
    fn rejects_bad_ensembles() {
        let neg = HermitianMatrix::diag(&[1.0, -1.0]);
        assert!(matches!(
            MatrixEnsemble::new(vec![(0.5, HermitianMatrix::identity(2)), (0.5, neg)]),
            Err(Error::InvalidEnsemble(_))
        ));
        assert!(MatrixEnsemble::new(vec![(0.5, HermitianMatrix::identity(2))]).is_err());
        assert!(MatrixEnsemble::new(vec![(0.5, HermitianMatrix::identity(2)), (0.5, HermitianMatrix::identity(3))]).is_err());
        assert!(MatrixEnsemble::new(vec![]).is_err());
    }

    #[test]
    fn json_layouts() {
        let s = serde_json::to_string(&e0()).unwrap();
        assert!(s.contains("\"atoms\"") && s.contains("\"w\""));
        let back: MatrixEnsemble = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e0());

        let p = ProductEnsemble::from_fn(vec![vec![0.25, 0.75], vec![1.0]], |t| {
            HermitianMatrix::diag(&[1.0 + t[0] as f64, 2.0])
        })
        .unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"1,0\""));
        let back: ProductEnsemble = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let missing = r#"{"factors":[[0.5,0.5]],"z":{"0":{"dim":1,"re":[[1.0]]}}}"#;
        assert!(serde_json::from_str::<ProductEnsemble>(missing).is_err());
    }

    #[test]
    fn tower_property() {
        let p = ProductEnsemble::from_fn(vec![vec![0.2, 0.8], vec![0.5, 0.3, 0.2], vec![0.6, 0.4]], |t| {
            HermitianMatrix::from_real_rows(&[
                vec![1.0 + t[0] as f64, 0.1 * t[1] as f64],
                vec![0.1 * t[1] as f64, 2.0 + t[2] as f64 * t[0] as f64],
            ])
            .unwrap()
        })
        .unwrap();
        let direct = p.joint().expectation();
        for i in 0..3 {
            let inner = p.conditional_expectation(i).unwrap();
            let ws: Vec<f64> = p.rest_outcomes(i).unwrap().into_iter().map(|(_, w)| w).collect();
            let iterated = weighted_sum(ws.iter().copied().zip(inner.iter()));
            assert!((&iterated - &direct).max_abs_entry() < 1e-12);
            for over in [IntegrateOver::FactorI, IntegrateOver::Complement] {
                let slices = p.conditional_slices(i, over).unwrap();
                let means: Vec<HermitianMatrix> = slices.iter().map(|(s, _)| s.expectation()).collect();
                let again = weighted_sum(slices.iter().map(|(_, w)| *w).zip(means.iter()));
                assert!((&again - &direct).max_abs_entry() < 1e-12);
            }
        }
    }

    #[test]
    fn slice_validation() {
        let p = ProductEnsemble::from_fn(vec![vec![0.5, 0.5], vec![1.0]], |_| HermitianMatrix::identity(1)).unwrap();
        assert!(p.slice_factor(2, &[0]).is_err());
        assert!(p.slice_factor(0, &[0, 0]).is_err());
        assert!(p.slice_factor(0, &[1]).is_err());
        assert!(p.slice_complement(0, 5).is_err());
    }
}
