//! Matching a target correlation matrix with a convex mixture of extreme
//! measures.
//!
//! Every measure with the prescribed marginals has the same means and
//! variances, so correlation is affine in the measure: a mixture
//! `sum_n w_n p_n` has correlation matrix `sum_n w_n C_n`. Calibration is
//! therefore the linear feasibility problem
//!
//! ```text
//! A w = c,   1'w = 1,   w >= 0
//! ```
//!
//! where column `n` of `A` is the strict upper triangle of `C_n` and `c` that
//! of the target. [`calibrate`] solves it in three stages:
//!
//! 1. a linear program minimising `max_i |(A w - c)_i|` decides feasibility;
//! 2. among feasible weights, an active-set method picks the one of minimum
//!    Euclidean norm;
//! 3. moving along null directions of `[A; 1']` trims the support to at most
//!    `M + 1` structures, `M = J (J - 1) / 2`.

mod refine;
mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ejd::{
    compute_all_extreme_measures, compute_extreme_measure, enumerate_structures, ExtremeMeasure,
    MonotonicityVector,
};
use crate::error::{Error, Result};
use crate::marginals::TruncatedMarginal;
use crate::moments::{
    check_simplex, correlation_matrix, pairwise_correlation, upper_pairs, CorrelationMatrix,
    JointMeasure,
};
use crate::par;

/// Largest supported dimension; `2^(J-1)` structures become columns of `A`.
pub const MAX_DIM: usize = 16;

/// Default acceptance threshold on the max-norm residual.
pub const DEFAULT_RESIDUAL_THRESHOLD: f64 = 1e-8;

/// Slack allowed on the pairwise bounds and on PSD-ness.
pub const BOUND_TOL: f64 = 1e-8;
pub const PSD_TOL: f64 = 1e-8;
pub const DIAGONAL_TOL: f64 = 1e-12;

/// Weights below this are reported as exactly zero.
pub const WEIGHT_FLOOR: f64 = 1e-13;

/// Pairwise extreme correlations: `lower[i][j]` from the antimonotone and
/// `upper[i][j]` from the comonotone coupling of marginals `i` and `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationBounds {
    pub lower: CorrelationMatrix,
    pub upper: CorrelationMatrix,
}

pub fn admissible_bounds(marginals: &[TruncatedMarginal]) -> Result<CorrelationBounds> {
    let dim = marginals.len();
    if dim < 2 {
        return Err(Error::domain(format!("need J >= 2 marginals, got {dim}")));
    }
    let pairs: Vec<(usize, usize)> = upper_pairs(dim).collect();
    let anti = MonotonicityVector::new(vec![0, 1])?;
    let co = MonotonicityVector::new(vec![0, 0])?;
    let values = par::map_slice(&pairs, |&(i, j)| -> Result<(f64, f64)> {
        let pair = [marginals[i].clone(), marginals[j].clone()];
        let lo = pairwise_correlation(&compute_extreme_measure(&pair, &anti)?, 0, 1)?;
        let hi = pairwise_correlation(&compute_extreme_measure(&pair, &co)?, 0, 1)?;
        Ok((lo, hi))
    });
    let mut lower = DMatrix::identity(dim, dim);
    let mut upper = DMatrix::identity(dim, dim);
    for (&(i, j), v) in pairs.iter().zip(values) {
        let (lo, hi) = v?;
        lower[(i, j)] = lo;
        lower[(j, i)] = lo;
        upper[(i, j)] = hi;
        upper[(j, i)] = hi;
    }
    Ok(CorrelationBounds {
        lower: CorrelationMatrix::from_matrix(lower),
        upper: CorrelationMatrix::from_matrix(upper),
    })
}

/// Outcome of [`check_admissible`]; anything but `Admissible` names the first
/// violated condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Admissibility {
    Admissible,
    DimensionMismatch { matrix: usize, bounds: usize },
    NotSymmetric { row: usize, col: usize },
    DiagonalNotOne { index: usize, value: f64 },
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    OutOfBounds { row: usize, col: usize, value: f64, lower: f64, upper: f64 },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

impl std::fmt::Display for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Admissibility::Admissible => write!(f, "admissible"),
            Admissibility::DimensionMismatch { matrix, bounds } => {
                write!(f, "matrix is {matrix}x{matrix} but bounds are {bounds}x{bounds}")
            }
            Admissibility::NotSymmetric { row, col } => {
                write!(f, "not symmetric at ({row}, {col})")
            }
            Admissibility::DiagonalNotOne { index, value } => {
                write!(f, "diagonal entry {index} is {value}, expected 1")
            }
            Admissibility::NotPositiveSemidefinite { min_eigenvalue } => {
                write!(f, "not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e}")
            }
            Admissibility::OutOfBounds { row, col, value, lower, upper } => write!(
                f,
                "entry ({row}, {col}) = {value} lies outside [{lower}, {upper}]"
            ),
        }
    }
}

/// Symmetric, unit diagonal, PSD and within the pairwise extreme bounds.
pub fn check_admissible(c: &CorrelationMatrix, bounds: &CorrelationBounds) -> Admissibility {
    let dim = c.dim();
    if bounds.upper.dim() != dim || bounds.lower.dim() != dim {
        return Admissibility::DimensionMismatch {
            matrix: dim,
            bounds: bounds.upper.dim(),
        };
    }
    for (i, j) in upper_pairs(dim) {
        if c.get(i, j) != c.get(j, i) {
            return Admissibility::NotSymmetric { row: i, col: j };
        }
    }
    for i in 0..dim {
        if (c.get(i, i) - 1.0).abs() > DIAGONAL_TOL {
            return Admissibility::DiagonalNotOne {
                index: i,
                value: c.get(i, i),
            };
        }
    }
    let min_eigenvalue = c.min_eigenvalue();
    if min_eigenvalue < -PSD_TOL {
        return Admissibility::NotPositiveSemidefinite { min_eigenvalue };
    }
    for (i, j) in upper_pairs(dim) {
        let (value, lower, upper) = (c.get(i, j), bounds.lower.get(i, j), bounds.upper.get(i, j));
        if value < lower - BOUND_TOL || value > upper + BOUND_TOL {
            return Admissibility::OutOfBounds {
                row: i,
                col: j,
                value,
                lower,
                upper,
            };
        }
    }
    Admissibility::Admissible
}

/// The linear system `A w = c` over the `2^(J-1)` extreme structures.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationProblem {
    dim: usize,
    structures: Vec<MonotonicityVector>,
    columns: Vec<CorrelationMatrix>,
    a: DMatrix<f64>,
    target: DVector<f64>,
}

impl CalibrationProblem {
    /// `columns[n]` is the correlation matrix of the extreme measure for
    /// `structures[n]`.
    pub fn new(
        structures: Vec<MonotonicityVector>,
        columns: Vec<CorrelationMatrix>,
        target: &CorrelationMatrix,
    ) -> Result<Self> {
        let dim = target.dim();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::domain(format!(
                "calibration supports 2 <= J <= {MAX_DIM}, got {dim}"
            )));
        }
        if structures.len() != 1 << (dim - 1) || columns.len() != structures.len() {
            return Err(Error::config(format!(
                "expected {} structures and matrices for J = {dim}, got {} and {}",
                1usize << (dim - 1),
                structures.len(),
                columns.len()
            )));
        }
        if structures.iter().any(|e| e.len() != dim) || columns.iter().any(|c| c.dim() != dim) {
            return Err(Error::config("structure or matrix dimension differs from target"));
        }
        let m = dim * (dim - 1) / 2;
        let mut a = DMatrix::zeros(m, columns.len());
        for (n, c) in columns.iter().enumerate() {
            for (r, v) in c.upper_triangle().into_iter().enumerate() {
                a[(r, n)] = v;
            }
        }
        Ok(CalibrationProblem {
            dim,
            structures,
            columns,
            a,
            target: DVector::from_vec(target.upper_triangle()),
        })
    }

    /// Build `A` from precomputed extreme measures (one per structure, in
    /// [`enumerate_structures`] order).
    pub fn from_measures(measures: &[ExtremeMeasure], target: &CorrelationMatrix) -> Result<Self> {
        let columns: Vec<CorrelationMatrix> = par::map_slice(measures, correlation_matrix)
            .into_iter()
            .collect::<Result<_>>()?;
        let structures = measures.iter().map(|m| m.structure().clone()).collect();
        Self::new(structures, columns, target)
    }

    pub fn from_marginals(marginals: &[TruncatedMarginal], target: &CorrelationMatrix) -> Result<Self> {
        if marginals.len() != target.dim() {
            return Err(Error::config(format!(
                "{} marginals for a {}x{} target",
                marginals.len(),
                target.dim(),
                target.dim()
            )));
        }
        Self::from_measures(&compute_all_extreme_measures(marginals)?, target)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structures(&self) -> &[MonotonicityVector] {
        &self.structures
    }

    /// Extreme correlation matrices aligned with the columns of `A`.
    pub fn extreme_matrices(&self) -> &[CorrelationMatrix] {
        &self.columns
    }

    /// `M x N` matrix of vectorised extreme correlations.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }

    /// `max_i |(A w - c)_i|`.
    pub fn residual(&self, weights: &[f64]) -> f64 {
        (&self.a * DVector::from_column_slice(weights) - &self.target).amax()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// One weight per structure, in [`enumerate_structures`] order.
    pub weights: Vec<f64>,
    /// Max-norm residual of `A w - c`.
    pub residual: f64,
    /// Indices with positive weight.
    #[serde(rename = "active")]
    pub active_structures: Vec<usize>,
}

/// [`calibrate_with_threshold`] at [`DEFAULT_RESIDUAL_THRESHOLD`].
pub fn calibrate(problem: &CalibrationProblem) -> Result<CalibrationResult> {
    calibrate_with_threshold(problem, DEFAULT_RESIDUAL_THRESHOLD)
}

pub fn calibrate_with_threshold(
    problem: &CalibrationProblem,
    threshold: f64,
) -> Result<CalibrationResult> {
    if !(threshold >= 0.0) {
        return Err(Error::domain(format!("residual threshold must be >= 0, got {threshold}")));
    }
    let (m, n) = problem.a.shape();

    let start = minimax_weights(problem)?;
    let residual = problem.residual(&start);
    if residual > threshold {
        return Err(Error::InfeasibleTarget {
            residual,
            threshold,
        });
    }

    // [A; 1'] w = [c; 1]
    let e = DMatrix::from_fn(m + 1, n, |r, c| if r < m { problem.a[(r, c)] } else { 1.0 });
    let mut d = DVector::from_element(m + 1, 1.0);
    d.rows_mut(0, m).copy_from(&problem.target);

    let mut weights = refine::min_norm(&e, &d, &start);
    if problem.residual(&weights) > residual.max(threshold) {
        // The active-set pass can only stall, not fail; keep the LP vertex.
        weights = start;
    }
    refine::reduce_support(&e, &mut weights);
    // rounding dust from the projections
    for w in weights.iter_mut() {
        if *w < WEIGHT_FLOOR {
            *w = 0.0;
        }
    }

    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let residual = problem.residual(&weights);
    let active_structures = (0..n).filter(|&i| weights[i] > 0.0).collect();
    Ok(CalibrationResult {
        weights,
        residual,
        active_structures,
    })
}

/// Check `target` against the marginals, then calibrate. An inadmissible
/// target is rejected before any linear algebra runs.
pub fn calibrate_target(
    marginals: &[TruncatedMarginal],
    target: &CorrelationMatrix,
    threshold: f64,
) -> Result<(CalibrationProblem, CalibrationResult)> {
    let bounds = admissible_bounds(marginals)?;
    let verdict = check_admissible(target, &bounds);
    if !verdict.is_admissible() {
        return Err(Error::Inadmissible(verdict.to_string()));
    }
    let problem = CalibrationProblem::from_marginals(marginals, target)?;
    let result = calibrate_with_threshold(&problem, threshold)?;
    Ok((problem, result))
}

/// LP: minimise `t` subject to `-t <= (A w - c)_i <= t`, `1'w = 1`, `w >= 0`.
fn minimax_weights(problem: &CalibrationProblem) -> Result<Vec<f64>> {
    let (m, n) = problem.a.shape();
    // columns: w (n), t, upper slacks (m), lower slacks (m)
    let cols = n + 1 + 2 * m;
    let rows = 2 * m + 1;
    let mut lp = DMatrix::zeros(rows, cols);
    let mut rhs = vec![0.0; rows];
    for i in 0..m {
        for j in 0..n {
            lp[(i, j)] = problem.a[(i, j)];
            lp[(m + i, j)] = -problem.a[(i, j)];
        }
        lp[(i, n)] = -1.0;
        lp[(m + i, n)] = -1.0;
        lp[(i, n + 1 + i)] = 1.0;
        lp[(m + i, n + 1 + m + i)] = 1.0;
        rhs[i] = problem.target[i];
        rhs[m + i] = -problem.target[i];
    }
    for j in 0..n {
        lp[(2 * m, j)] = 1.0;
    }
    rhs[2 * m] = 1.0;
    let mut cost = vec![0.0; cols];
    cost[n] = 1.0;

    let x = simplex::minimize(&lp, &rhs, &cost)?;
    let mut w = x[..n].to_vec();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

/// Convex combination of extreme measures sharing their marginals. Kept as
/// weights plus components; never flattened into one density.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureMeasure {
    weights: Vec<f64>,
    components: Vec<ExtremeMeasure>,
    cumulative: Vec<f64>,
}

impl MixtureMeasure {
    /// A single extreme measure with weight one.
    pub fn single(measure: ExtremeMeasure) -> Self {
        MixtureMeasure {
            weights: vec![1.0],
            components: vec![measure],
            cumulative: vec![1.0],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ExtremeMeasure] {
        &self.components
    }

    /// Component selected by a uniform draw `u` in `[0, 1)`.
    pub fn sample_component(&self, u: f64) -> usize {
        let total = *self.cumulative.last().expect("nonempty mixture");
        let target = u * total;
        let mut k = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.weights.len() - 1);
        // never land on a zero-weight component
        while self.weights[k] == 0.0 && k > 0 {
            k -= 1;
        }
        k
    }
}

impl JointMeasure for MixtureMeasure {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn marginals(&self) -> &[TruncatedMarginal] {
        self.components[0].marginals()
    }

    fn cross_moment(&self, k: usize, l: usize) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, m)| w * m.cross_moment(k, l))
            .sum()
    }
}

/// Mixture `sum_n w_n p_n`. Weights must lie on the simplex and all measures
/// must share the same truncated marginals.
pub fn build_mixture(weights: &[f64], measures: &[ExtremeMeasure]) -> Result<MixtureMeasure> {
    check_simplex(weights)?;
    if weights.len() != measures.len() {
        return Err(Error::config(format!(
            "{} weights for {} measures",
            weights.len(),
            measures.len()
        )));
    }
    let reference = measures[0].marginals();
    if measures.iter().any(|m| m.marginals() != reference) {
        return Err(Error::config("mixture components have different marginals"));
    }
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }
    Ok(MixtureMeasure {
        weights: weights.to_vec(),
        components: measures.to_vec(),
        cumulative,
    })
}

/// Structures in [`enumerate_structures`] order, exposed for callers that
/// hold only a [`CalibrationResult`].
pub fn structures_for(dim: usize) -> Result<Vec<MonotonicityVector>> {
    enumerate_structures(dim)
}
