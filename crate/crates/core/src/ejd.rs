//! Extreme joint distributions on the integer lattice.
//!
//! For `J` truncated marginals and a monotonicity vector `e` (with `e[0] = 0`),
//! the extreme measure couples every coordinate through a single uniform
//! level `u`: comonotone coordinates (`e[j] = 0`) take their `u`-quantile and
//! antimonotone ones (`e[j] = 1`) their `(1 - u)`-quantile. The support is a
//! staircase of at most `sum(I*_j) + 1` points.
//!
//! Two routes compute the same object:
//!
//! * [`compute_extreme_measure`] sweeps the level from 0 to 1, advancing the
//!   coordinates whose level interval is exhausted;
//! * [`closed_form_density`] evaluates the mass of one lattice point as the
//!   overlap of the coordinates' level intervals.
//!
//! [`frechet_2d`] is a third, separately coded path for `J = 2`.

use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marginals::{compensated_sum, TruncatedMarginal};
use crate::par;

/// Two CDF levels closer than this are treated as equal by the sweep.
pub const LEVEL_TOL: f64 = 1e-12;

/// Steps carrying at most this much mass are dropped from the support.
pub const MASS_DROP_TOL: f64 = 1e-14;

/// Binary vector selecting comonotone (`0`) or antimonotone (`1`) coupling of
/// each coordinate relative to the first. Always canonical: `e[0] == 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonotonicityVector(Vec<u8>);

impl MonotonicityVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.len() < 2 {
            return Err(Error::domain(format!(
                "monotonicity vector needs length >= 2, got {}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::domain("monotonicity vector entries must be 0 or 1"));
        }
        if bits[0] != 0 {
            return Err(Error::domain(
                "monotonicity vector is not canonical: first entry must be 0",
            ));
        }
        Ok(MonotonicityVector(bits))
    }

    /// Flip every bit if needed so the first entry is zero. A vector and its
    /// complement describe the same structure.
    pub fn canonicalize(mut bits: Vec<u8>) -> Result<Self> {
        if bits.first() == Some(&1) {
            for b in &mut bits {
                *b ^= 1;
            }
        }
        Self::new(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_antimonotone(&self, j: usize) -> bool {
        self.0[j] == 1
    }

    /// Whether coordinates `k` and `l` are coupled comonotonically.
    pub fn same_direction(&self, k: usize, l: usize) -> bool {
        self.0[k] == self.0[l]
    }

    /// Compact label such as `"010"`.
    pub fn label(&self) -> String {
        self.0.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

impl fmt::Display for MonotonicityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for MonotonicityVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// All `2^(J-1)` canonical structures, ordered lexicographically in `e[1..]`.
pub fn enumerate_structures(dim: usize) -> Result<Vec<MonotonicityVector>> {
    if dim < 2 {
        return Err(Error::domain(format!("need J >= 2, got {dim}")));
    }
    if dim > 63 {
        return Err(Error::domain(format!("J = {dim} is too large to enumerate")));
    }
    let count = 1u64 << (dim - 1);
    Ok((0..count)
        .map(|code| {
            let mut bits = vec![0u8; dim];
            for (pos, bit) in bits[1..].iter_mut().enumerate() {
                // most significant bit drives e[1]
                *bit = ((code >> (dim - 2 - pos)) & 1) as u8;
            }
            MonotonicityVector(bits)
        })
        .collect())
}

/// `F(i)` for a comonotone coordinate, `1 - F(i)` for an antimonotone one.
pub fn signed_cdf(marginal: &TruncatedMarginal, i: i64, antimonotone: bool) -> f64 {
    if antimonotone {
        1.0 - marginal.cdf(i)
    } else {
        marginal.cdf(i)
    }
}

/// Mass of the extreme measure with structure `e` at `point`.
///
/// Coordinate `j` at `i_j` occupies the level interval
/// `[F(i_j - 1), F(i_j)]` when comonotone and `[1 - F(i_j), 1 - F(i_j - 1)]`
/// when antimonotone; the mass is the length of the intersection.
pub fn closed_form_density(
    marginals: &[TruncatedMarginal],
    e: &MonotonicityVector,
    point: &[i64],
) -> f64 {
    assert_eq!(marginals.len(), e.len(), "dimension mismatch");
    assert_eq!(point.len(), e.len(), "dimension mismatch");
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for ((m, &bit), &i) in marginals.iter().zip(e.bits()).zip(point) {
        let anti = bit == 1;
        let shift = bit as i64;
        upper = upper.min(signed_cdf(m, i - shift, anti));
        lower = lower.max(signed_cdf(m, i + shift - 1, anti));
    }
    (upper - lower).max(0.0)
}

/// A joint law with fixed marginals whose support is a monotone staircase.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeMeasure {
    structure: MonotonicityVector,
    marginals: Vec<TruncatedMarginal>,
    /// Flat `len * dim` array of support coordinates, staircase order.
    support: Vec<u32>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ExtremeMeasure {
    fn from_parts(
        structure: MonotonicityVector,
        marginals: Vec<TruncatedMarginal>,
        support: Vec<u32>,
        probs: Vec<f64>,
    ) -> Self {
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = crate::marginals::Neumaier::default();
        for &p in &probs {
            acc.add(p);
            cumulative.push(acc.total());
        }
        ExtremeMeasure {
            structure,
            marginals,
            support,
            probs,
            cumulative,
        }
    }

    pub fn dim(&self) -> usize {
        self.structure.len()
    }

    pub fn structure(&self) -> &MonotonicityVector {
        &self.structure
    }

    pub fn marginals(&self) -> &[TruncatedMarginal] {
        &self.marginals
    }

    pub fn epsilon(&self) -> f64 {
        self.marginals[0].epsilon()
    }

    /// Number of support points.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn point(&self, k: usize) -> &[u32] {
        let d = self.dim();
        &self.support[k * d..(k + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.support.chunks_exact(self.dim())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `point`, zero off the support.
    pub fn prob_at(&self, point: &[u32]) -> f64 {
        self.points()
            .position(|p| p == point)
            .map_or(0.0, |k| self.probs[k])
    }

    /// Index of the support point selected by a uniform draw `u` in `[0, 1)`.
    pub fn sample_index(&self, u: f64) -> usize {
        let total = *self.cumulative.last().expect("measure has support");
        let target = u * total;
        self.cumulative
            .partition_point(|&c| c <= target)
            .min(self.probs.len() - 1)
    }

    /// Marginal pmf of coordinate `j` recovered from the joint support.
    pub fn coordinate_pmf(&self, j: usize) -> Vec<f64> {
        let mut pmf = vec![0.0; self.marginals[j].support_max() + 1];
        for (p, &w) in self.points().zip(&self.probs) {
            pmf[p[j] as usize] += w;
        }
        pmf
    }

    /// `E[X_k X_l]` under this measure.
    pub fn cross_moment(&self, k: usize, l: usize) -> f64 {
        compensated_sum(
            self.points()
                .zip(&self.probs)
                .map(|(p, &w)| p[k] as f64 * p[l] as f64 * w),
        )
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }
}

impl Serialize for ExtremeMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let support: Vec<&[u32]> = self.points().collect();
        let mut st = s.serialize_struct("ExtremeMeasure", 5)?;
        st.serialize_field("e", &self.structure)?;
        st.serialize_field("support", &support)?;
        st.serialize_field("probs", &self.probs)?;
        st.serialize_field("epsilon", &self.epsilon())?;
        st.serialize_field("marginals", &self.marginals)?;
        st.end()
    }
}

fn check_marginals(marginals: &[TruncatedMarginal], dim: usize) -> Result<()> {
    if marginals.len() != dim {
        return Err(Error::config(format!(
            "{} marginals supplied for a structure of length {dim}",
            marginals.len()
        )));
    }
    let eps = marginals[0].epsilon();
    if let Some(j) = marginals.iter().position(|m| m.epsilon() != eps) {
        return Err(Error::config(format!(
            "marginal {j} truncated with epsilon {} but marginal 0 with {eps}",
            marginals[j].epsilon()
        )));
    }
    Ok(())
}

/// Extreme measure for structure `e`, computed by the staircase sweep.
pub fn compute_extreme_measure(
    marginals: &[TruncatedMarginal],
    e: &MonotonicityVector,
) -> Result<ExtremeMeasure> {
    check_marginals(marginals, e.len())?;
    let (support, probs) = sweep(marginals, e.bits())?;
    Ok(ExtremeMeasure::from_parts(
        e.clone(),
        marginals.to_vec(),
        support,
        probs,
    ))
}

/// Every extreme measure for `marginals`, in [`enumerate_structures`] order.
/// Structures are processed in parallel when the `parallel` feature is on.
pub fn compute_all_extreme_measures(
    marginals: &[TruncatedMarginal],
) -> Result<Vec<ExtremeMeasure>> {
    let structures = enumerate_structures(marginals.len())?;
    check_marginals(marginals, structures[0].len())?;
    par::map_slice(&structures, |e| compute_extreme_measure(marginals, e))
        .into_iter()
        .collect()
}

/// The level sweep. `bits` need not be canonical; a complemented vector walks
/// the same staircase from the other end.
pub(crate) fn sweep(marginals: &[TruncatedMarginal], bits: &[u8]) -> Result<(Vec<u32>, Vec<f64>)> {
    let dim = bits.len();
    // Upper end of the level interval occupied by coordinate j at x.
    let upper = |j: usize, x: i64| -> f64 {
        if bits[j] == 1 {
            signed_cdf(&marginals[j], x - 1, true)
        } else {
            signed_cdf(&marginals[j], x, false)
        }
    };

    let mut x: Vec<i64> = bits
        .iter()
        .zip(marginals)
        .map(|(&b, m)| if b == 1 { m.support_max() as i64 } else { 0 })
        .collect();
    let step: Vec<i64> = bits.iter().map(|&b| if b == 1 { -1 } else { 1 }).collect();

    let max_steps: usize = marginals.iter().map(|m| m.support_max() + 1).sum();
    let mut support = Vec::new();
    let mut probs = Vec::new();
    let mut z_prev = 0.0;

    for _ in 0..=max_steps {
        let levels: Vec<f64> = (0..dim).map(|j| upper(j, x[j])).collect();
        let z = levels.iter().copied().fold(f64::INFINITY, f64::min);
        let mass = z - z_prev;
        if mass > MASS_DROP_TOL {
            support.extend(x.iter().map(|&c| c as u32));
            probs.push(mass);
        }
        if (z - 1.0).abs() <= LEVEL_TOL {
            return Ok((support, probs));
        }
        for j in 0..dim {
            if (levels[j] - z).abs() <= LEVEL_TOL {
                x[j] += step[j];
            }
        }
        if x
            .iter()
            .zip(marginals)
            .any(|(&c, m)| c < 0 || c > m.support_max() as i64)
        {
            return Err(Error::Numerical(
                "staircase sweep left the truncated support".into(),
            ));
        }
        z_prev = z;
    }
    Err(Error::Numerical(
        "staircase sweep did not reach level 1".into(),
    ))
}

/// Direction of a two-dimensional Fréchet bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrechetDirection {
    /// Upper bound: comonotone coupling, maximal `E[X1 X2]`.
    Max,
    /// Lower bound: antimonotone coupling, minimal `E[X1 X2]`.
    Min,
}

/// Two-dimensional extreme measure built as a quantile coupling.
///
/// Coded independently of the sweep: the unit interval is cut at every CDF
/// value of either marginal and each piece is mapped to the pair of quantiles
/// of its midpoint.
pub fn frechet_2d(
    first: &TruncatedMarginal,
    second: &TruncatedMarginal,
    direction: FrechetDirection,
) -> Result<ExtremeMeasure> {
    let marginals = vec![first.clone(), second.clone()];
    check_marginals(&marginals, 2)?;
    let anti = direction == FrechetDirection::Min;

    let f1 = first.cdf_values();
    let f2 = second.cdf_values();
    let mut cuts: Vec<f64> = Vec::with_capacity(f1.len() + f2.len() + 1);
    cuts.push(0.0);
    cuts.extend_from_slice(f1);
    if anti {
        // u crosses 1 - F2(j) exactly when 1 - u crosses F2(j)
        cuts.extend(f2.iter().map(|&f| 1.0 - f));
        cuts.push(1.0);
    } else {
        cuts.extend_from_slice(f2);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|b, a| (*b - *a).abs() <= LEVEL_TOL);

    let quantile = |cdf: &[f64], u: f64| -> u32 {
        cdf.partition_point(|&f| f <= u).min(cdf.len() - 1) as u32
    };

    let mut support = Vec::new();
    let mut probs = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1].min(1.0));
        if b - a <= MASS_DROP_TOL {
            continue;
        }
        let u = 0.5 * (a + b);
        let i = quantile(f1, u);
        let j = if anti {
            quantile(f2, 1.0 - u)
        } else {
            quantile(f2, u)
        };
        support.extend([i, j]);
        probs.push(b - a);
    }

    let e = MonotonicityVector::new(vec![0, u8::from(anti)])?;
    Ok(ExtremeMeasure::from_parts(e, marginals, support, probs))
}
