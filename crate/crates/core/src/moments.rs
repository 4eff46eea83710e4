//! Correlations of joint measures with fixed marginals.
//!
//! Means and variances always come from the truncated marginals; only the
//! cross moments `E[X_k X_l]` are read from the joint measure. Because every
//! measure built from the same marginals shares those first and second
//! moments, the correlation is affine in the measure and mixtures can be
//! handled matrix by matrix.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::ejd::ExtremeMeasure;
use crate::error::{Error, Result};
use crate::marginals::TruncatedMarginal;

/// A joint law on the lattice whose marginals are known.
pub trait JointMeasure {
    fn dim(&self) -> usize;
    fn marginals(&self) -> &[TruncatedMarginal];
    /// `E[X_k X_l]`.
    fn cross_moment(&self, k: usize, l: usize) -> f64;
}

impl JointMeasure for ExtremeMeasure {
    fn dim(&self) -> usize {
        ExtremeMeasure::dim(self)
    }

    fn marginals(&self) -> &[TruncatedMarginal] {
        ExtremeMeasure::marginals(self)
    }

    fn cross_moment(&self, k: usize, l: usize) -> f64 {
        ExtremeMeasure::cross_moment(self, k, l)
    }
}

/// Square matrix of pairwise correlations.
///
/// Construction only checks shape and finiteness, so that candidate targets
/// can be held and then screened with
/// [`check_admissible`](crate::calibration::check_admissible). Matrices
/// produced by this crate are symmetric with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    values: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::domain("correlation matrix is empty"));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::domain(format!(
                "row {r} has {} entries, expected {n}",
                rows[r].len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("correlation matrix has non-finite entries"));
        }
        Ok(CorrelationMatrix {
            values: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        })
    }

    pub fn identity(dim: usize) -> Self {
        CorrelationMatrix {
            values: DMatrix::identity(dim, dim),
        }
    }

    /// Symmetric matrix with unit diagonal from its strict upper triangle in
    /// row-major order `(0,1), (0,2), ..., (J-2,J-1)`.
    pub fn from_upper_triangle(dim: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != dim * dim.saturating_sub(1) / 2 {
            return Err(Error::domain(format!(
                "{} upper-triangle entries do not fit a {dim}x{dim} matrix",
                upper.len()
            )));
        }
        let mut values = DMatrix::identity(dim, dim);
        for ((i, j), &v) in upper_pairs(dim).zip(upper) {
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
        Ok(CorrelationMatrix { values })
    }

    pub(crate) fn from_matrix(values: DMatrix<f64>) -> Self {
        CorrelationMatrix { values }
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.values[(i, j)]).collect())
            .collect()
    }

    /// Strict upper triangle, row-major.
    pub fn upper_triangle(&self) -> Vec<f64> {
        upper_pairs(self.dim())
            .map(|(i, j)| self.values[(i, j)])
            .collect()
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.values + self.values.transpose()) * 0.5;
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &CorrelationMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        (&self.values - &other.values).abs().max()
    }
}

/// Index pairs `(i, j)`, `i < j`, in row-major order.
pub fn upper_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |i| ((i + 1)..dim).map(move |j| (i, j)))
}

impl fmt::Display for CorrelationMatrix {
    /// Rows of six-significant-digit values.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format_sig(self.values[(i, j)], 6))
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `x` rounded to `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

impl Serialize for CorrelationMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CorrelationMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        CorrelationMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

fn marginal_moments(m: &TruncatedMarginal) -> (f64, f64) {
    (m.mean(), m.variance())
}

/// Pearson correlation of coordinates `k` and `l` under `measure`.
pub fn pairwise_correlation<M: JointMeasure + ?Sized>(
    measure: &M,
    k: usize,
    l: usize,
) -> Result<f64> {
    let dim = measure.dim();
    if k >= dim || l >= dim {
        return Err(Error::domain(format!(
            "pair ({k}, {l}) out of range for dimension {dim}"
        )));
    }
    if k == l {
        return Err(Error::domain("pairwise correlation needs k != l"));
    }
    let (mk, vk) = marginal_moments(&measure.marginals()[k]);
    let (ml, vl) = marginal_moments(&measure.marginals()[l]);
    for (idx, v) in [(k, vk), (l, vl)] {
        if !(v > 0.0) {
            return Err(Error::UndefinedCorrelation(format!(
                "coordinate {idx} has zero variance"
            )));
        }
    }
    let cov = measure.cross_moment(k, l) - mk * ml;
    Ok((cov / (vk * vl).sqrt()).clamp(-1.0, 1.0))
}

/// All pairwise correlations, unit diagonal.
pub fn correlation_matrix<M: JointMeasure + ?Sized>(measure: &M) -> Result<CorrelationMatrix> {
    let dim = measure.dim();
    let mut values = DMatrix::identity(dim, dim);
    for (i, j) in upper_pairs(dim) {
        let r = pairwise_correlation(measure, i, j)?;
        values[(i, j)] = r;
        values[(j, i)] = r;
    }
    Ok(CorrelationMatrix::from_matrix(values))
}

/// Tolerance on `sum(weights) == 1`.
pub const SIMPLEX_TOL: f64 = 1e-10;

pub(crate) fn check_simplex(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::domain("weight vector is empty"));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::domain(format!("weight {i} is not a nonnegative number: {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::domain(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// `sum_n w_n C_n`.
pub fn mixture_correlation(
    weights: &[f64],
    matrices: &[CorrelationMatrix],
) -> Result<CorrelationMatrix> {
    check_simplex(weights)?;
    if weights.len() != matrices.len() {
        return Err(Error::domain(format!(
            "{} weights for {} matrices",
            weights.len(),
            matrices.len()
        )));
    }
    let dim = matrices[0].dim();
    if matrices.iter().any(|m| m.dim() != dim) {
        return Err(Error::domain("matrices differ in dimension"));
    }
    let mut acc = DMatrix::zeros(dim, dim);
    for (w, m) in weights.iter().zip(matrices) {
        acc += m.as_matrix() * *w;
    }
    Ok(CorrelationMatrix::from_matrix(acc))
}

/// Correlation of `N1 = A + B` and `N2 = B + C` for independent Poisson
/// components with rates `lambda1` (A), `lambda2` (shared B) and `lambda3` (C).
pub fn csm_correlation(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<f64> {
    if [lambda1, lambda2, lambda3]
        .iter()
        .any(|l| !l.is_finite() || *l < 0.0)
    {
        return Err(Error::domain("common-shock rates must be finite and nonnegative"));
    }
    let (s1, s2) = (lambda1 + lambda2, lambda2 + lambda3);
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::domain(
            "common-shock correlation needs lambda1 + lambda2 > 0 and lambda2 + lambda3 > 0",
        ));
    }
    Ok((lambda2 / (s1 * s2).sqrt()).clamp(0.0, 1.0))
}
