//! Backward simulation of correlated Poisson processes and forward
//! continuation with independent increments.
//!
//! Given a mixture whose marginals are Poisson(`lambda_j T`), each replication
//!
//! 1. draws a structure index from the mixture weights,
//! 2. draws the terminal count vector `N_T` from that extreme measure,
//! 3. scatters `N_T(j)` uniform arrival times on `[0, T]` per component.
//!
//! Conditional uniformity makes each component a Poisson process, and the
//! correlation of `N_t` grows linearly: `rho_ij * t / T`. Continuing past `T`
//! gives a scalloped correlation curve, equal to `rho_T` at every multiple of
//! `T`.
//!
//! Forward continuation appends, on each later interval of length `T`, an
//! independent copy of the backward-simulated process.
//!
//! Randomness: ChaCha8 keyed by the master seed, one stream per replication,
//! and a disjoint block of the keystream per interval. Replications are
//! independent tasks, so output does not depend on the thread count.

use std::io::{self, Write};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calibration::MixtureMeasure;
use crate::error::{Error, Result};
use crate::moments::{upper_pairs, CorrelationMatrix, JointMeasure};
use crate::par;

/// Keystream words reserved per (replication, interval).
const INTERVAL_WORDS: u128 = 1 << 40;

/// Default number of batches for standard errors.
pub const DEFAULT_BATCHES: usize = 100;

/// Grid points per horizon interval in a [`CorrelationCurve`].
pub const CURVE_POINTS_PER_INTERVAL: usize = 100;

fn rng_for(seed: u64, replication: usize, interval: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng.set_word_pos(interval as u128 * INTERVAL_WORDS);
    rng
}

/// Simulated arrival times, `n_paths` replications of a `J`-variate process on
/// `[0, horizon]`. Each component's arrivals are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct EventPaths {
    dim: usize,
    horizon: f64,
    seed: u64,
    /// Arrival times, path-major then component.
    times: Vec<f64>,
    /// `offsets[p * dim + j]..offsets[p * dim + j + 1]` indexes `times`.
    offsets: Vec<usize>,
}

impl EventPaths {
    fn from_paths(dim: usize, horizon: f64, seed: u64, paths: Vec<Vec<Vec<f64>>>) -> Self {
        let total: usize = paths.iter().flatten().map(Vec::len).sum();
        let mut times = Vec::with_capacity(total);
        let mut offsets = Vec::with_capacity(paths.len() * dim + 1);
        offsets.push(0);
        for path in paths {
            for comp in path {
                times.extend_from_slice(&comp);
                offsets.push(times.len());
            }
        }
        EventPaths {
            dim,
            horizon,
            seed,
            times,
            offsets,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_paths(&self) -> usize {
        (self.offsets.len() - 1) / self.dim
    }

    /// Sorted arrival times of component `j` on path `p`.
    pub fn arrivals(&self, p: usize, j: usize) -> &[f64] {
        let k = p * self.dim + j;
        &self.times[self.offsets[k]..self.offsets[k + 1]]
    }

    /// `N_t` for component `j` on path `p`.
    pub fn count_at(&self, p: usize, j: usize, t: f64) -> u64 {
        self.arrivals(p, j).partition_point(|&x| x <= t) as u64
    }

    pub fn total_events(&self) -> usize {
        self.times.len()
    }

    /// Write `path_id,component,arrival_time` rows, times with 9 decimals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "path_id,component,arrival_time")?;
        for p in 0..self.n_paths() {
            for j in 0..self.dim {
                for t in self.arrivals(p, j) {
                    writeln!(out, "{p},{j},{t:.9}")?;
                }
            }
        }
        Ok(())
    }
}

/// Checks that every mixture marginal is Poisson observed over `horizon`;
/// returns the means `lambda_j T`.
fn poisson_means(mixture: &MixtureMeasure, horizon: f64) -> Result<Vec<f64>> {
    mixture
        .marginals()
        .iter()
        .enumerate()
        .map(|(j, m)| match m.source() {
            crate::marginals::DiscreteMarginal::Poisson { lambda, horizon: h }
                if (h - horizon).abs() <= 1e-12 * horizon.abs().max(1.0) =>
            {
                Ok(lambda * h)
            }
            crate::marginals::DiscreteMarginal::Poisson { horizon: h, .. } => Err(Error::domain(
                format!("marginal {j} is Poisson over horizon {h}, simulation horizon is {horizon}"),
            )),
            _ => Err(Error::domain(format!(
                "marginal {j} is not Poisson; backward simulation needs Poisson terminal laws"
            ))),
        })
        .collect()
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    Ok(())
}

/// One backward draw on `[offset, offset + horizon)`, appended per component.
fn draw_interval(
    mixture: &MixtureMeasure,
    rng: &mut ChaCha8Rng,
    horizon: f64,
    offset: f64,
    comps: &mut [Vec<f64>],
) {
    let n = mixture.sample_component(rng.random::<f64>());
    let measure = &mixture.components()[n];
    let point = measure.point(measure.sample_index(rng.random::<f64>()));
    for (comp, &count) in comps.iter_mut().zip(point) {
        let first = comp.len();
        comp.extend((0..count).map(|_| offset + rng.random::<f64>() * horizon));
        comp[first..].sort_unstable_by(f64::total_cmp);
    }
}

/// Backward simulation of `n_paths` replications on `[0, horizon]`.
pub fn backward_simulate(
    mixture: &MixtureMeasure,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<EventPaths> {
    check_horizon(horizon)?;
    if n_paths == 0 {
        return Err(Error::domain("n_paths must be at least 1"));
    }
    poisson_means(mixture, horizon)?;
    let dim = mixture.dim();
    let paths = par::map_range(n_paths, |rep| {
        let mut comps = vec![Vec::new(); dim];
        draw_interval(mixture, &mut rng_for(seed, rep, 0), horizon, 0.0, &mut comps);
        comps
    });
    Ok(EventPaths::from_paths(dim, horizon, seed, paths))
}

/// Extend paths simulated on `[0, T]` to `[0, m T]`.
///
/// The increment over `[kT, (k+1)T)`, `k = 1..m-1`, is a fresh backward draw
/// from `mixture`, independent of the past and of other intervals. Each
/// component therefore keeps independent Poisson increments, while the pair
/// covariance adds up interval by interval: `cov(2T) = 2 cov(T)` and
/// `rho(T + s) = rho_T (T^2 + s^2) / (T (T + s))`.
pub fn forward_continue(
    paths: &EventPaths,
    mixture: &MixtureMeasure,
    horizon: f64,
    m: usize,
    seed: u64,
) -> Result<EventPaths> {
    check_horizon(horizon)?;
    if m < 1 {
        return Err(Error::domain("forward continuation needs m >= 1 intervals"));
    }
    if (paths.horizon() - horizon).abs() > 1e-12 * horizon {
        return Err(Error::domain(format!(
            "paths cover [0, {}], expected [0, {horizon}]",
            paths.horizon()
        )));
    }
    if paths.dim() != mixture.dim() {
        return Err(Error::config("paths and mixture differ in dimension"));
    }
    poisson_means(mixture, horizon)?;
    if m == 1 {
        return Ok(paths.clone());
    }
    let dim = paths.dim();
    let extended = par::map_range(paths.n_paths(), |rep| {
        let mut comps: Vec<Vec<f64>> = (0..dim).map(|j| paths.arrivals(rep, j).to_vec()).collect();
        for k in 1..m {
            let mut rng = rng_for(seed, rep, k);
            draw_interval(mixture, &mut rng, horizon, k as f64 * horizon, &mut comps);
        }
        comps
    });
    Ok(EventPaths::from_paths(dim, horizon * m as f64, seed, extended))
}

/// Theoretical correlation at time `t` for terminal correlation `rho_t` at
/// horizon `horizon`: linear on `[0, T]`, then `rho_T (n + s^2) / (n + s)`
/// with `n = floor(t / T)`, `s = t / T - n`. NaN for `t < 0` or `T <= 0`.
pub fn theoretical_corr(rho_t: f64, t: f64, horizon: f64) -> f64 {
    if !(t >= 0.0 && horizon > 0.0) {
        return f64::NAN;
    }
    let x = t / horizon;
    if x <= 1.0 {
        return rho_t * x;
    }
    let n = x.floor();
    let s = x - n;
    rho_t * (n + s * s) / (n + s)
}

/// Integer sums of counts and count products over a set of paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMoments {
    dim: usize,
    n: u64,
    sum: Vec<u64>,
    /// Row-major `dim x dim`, upper triangle with diagonal filled.
    cross: Vec<u64>,
}

impl CountMoments {
    pub fn new(dim: usize) -> Self {
        CountMoments {
            dim,
            n: 0,
            sum: vec![0; dim],
            cross: vec![0; dim * dim],
        }
    }

    pub fn add(&mut self, counts: &[u64]) {
        self.n += 1;
        for i in 0..self.dim {
            self.sum[i] += counts[i];
            for j in i..self.dim {
                self.cross[i * self.dim + j] += counts[i] * counts[j];
            }
        }
    }

    pub fn merge(&mut self, other: &CountMoments) {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += b;
        }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Sample covariance (divisor `n - 1`) of components `i` and `j`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.n as f64;
        // n * sum(xy) - sum(x) sum(y), exact in integers while it fits
        let centred = self.n as i128 * self.cross[i * self.dim + j] as i128
            - self.sum[i] as i128 * self.sum[j] as i128;
        centred as f64 / (n * (n - 1.0))
    }

    /// Sample Pearson correlation matrix.
    pub fn correlation(&self) -> Result<CorrelationMatrix> {
        if self.n < 2 {
            return Err(Error::domain("empirical correlation needs at least 2 paths"));
        }
        let var: Vec<f64> = (0..self.dim).map(|i| self.covariance(i, i)).collect();
        if let Some(i) = var.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::UndefinedCorrelation(format!(
                "component {i} has zero sample variance"
            )));
        }
        let mut values = DMatrix::identity(self.dim, self.dim);
        for (i, j) in upper_pairs(self.dim) {
            let r = (self.covariance(i, j) / (var[i] * var[j]).sqrt()).clamp(-1.0, 1.0);
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
        Ok(CorrelationMatrix::from_matrix(values))
    }
}

fn check_time(paths: &EventPaths, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= paths.horizon() * (1.0 + 1e-12)) {
        return Err(Error::domain(format!(
            "time {t} outside [0, {}]",
            paths.horizon()
        )));
    }
    Ok(())
}

/// Count moments at time `t` for each of `batches` contiguous groups of paths.
pub fn batch_moments(paths: &EventPaths, t: f64, batches: usize) -> Result<Vec<CountMoments>> {
    check_time(paths, t)?;
    let n = paths.n_paths();
    if batches == 0 || batches > n {
        return Err(Error::domain(format!(
            "cannot split {n} paths into {batches} batches"
        )));
    }
    let dim = paths.dim();
    Ok(par::map_range(batches, |b| {
        let mut acc = CountMoments::new(dim);
        let mut counts = vec![0u64; dim];
        for p in b * n / batches..(b + 1) * n / batches {
            for (j, c) in counts.iter_mut().enumerate() {
                *c = paths.count_at(p, j, t);
            }
            acc.add(&counts);
        }
        acc
    }))
}

/// Sample correlation matrix of `N_t` across replications.
pub fn empirical_correlation(paths: &EventPaths, t: f64) -> Result<CorrelationMatrix> {
    let batches = paths.n_paths().clamp(1, DEFAULT_BATCHES);
    total_moments(&batch_moments(paths, t, batches)?).correlation()
}

fn total_moments(parts: &[CountMoments]) -> CountMoments {
    let mut total = CountMoments::new(parts[0].dim);
    for p in parts {
        total.merge(p);
    }
    total
}

/// A correlation estimate with batch standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub estimate: CorrelationMatrix,
    /// Standard error of each entry, zero on the diagonal.
    pub std_error: DMatrix<f64>,
    /// Per-batch correlation matrices.
    pub batches: Vec<CorrelationMatrix>,
}

/// Pooled correlation at `t` plus the spread of per-batch correlations,
/// `sd(batch) / sqrt(batches)`.
pub fn empirical_correlation_with_se(
    paths: &EventPaths,
    t: f64,
    batches: usize,
) -> Result<CorrelationEstimate> {
    if batches < 2 {
        return Err(Error::domain("standard errors need at least 2 batches"));
    }
    let parts = batch_moments(paths, t, batches)?;
    let estimate = total_moments(&parts).correlation()?;
    let per_batch: Vec<CorrelationMatrix> = parts
        .iter()
        .map(CountMoments::correlation)
        .collect::<Result<_>>()?;
    let std_error = batch_std_error(&per_batch, |c, i, j| c.get(i, j));
    Ok(CorrelationEstimate {
        estimate,
        std_error,
        batches: per_batch,
    })
}

/// `sd / sqrt(B)` of a per-batch statistic, entrywise over the upper triangle.
pub fn batch_std_error<T>(batches: &[T], stat: impl Fn(&T, usize, usize) -> f64) -> DMatrix<f64>
where
    T: HasDim,
{
    let dim = batches[0].dim();
    let b = batches.len() as f64;
    let mut se = DMatrix::zeros(dim, dim);
    for (i, j) in upper_pairs(dim) {
        let xs: Vec<f64> = batches.iter().map(|c| stat(c, i, j)).collect();
        let mean = xs.iter().sum::<f64>() / b;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
        let s = (var / b).sqrt();
        se[(i, j)] = s;
        se[(j, i)] = s;
    }
    se
}

/// Anything with a component count; lets [`batch_std_error`] work on pairs of
/// matrices as well as single ones.
pub trait HasDim {
    fn dim(&self) -> usize;
}

impl HasDim for CorrelationMatrix {
    fn dim(&self) -> usize {
        CorrelationMatrix::dim(self)
    }
}

impl<A: HasDim, B> HasDim for (A, B) {
    fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Empirical and theoretical pairwise correlations on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurve {
    pub times: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// `empirical[k][q]`: pair `q` at `times[k]`; NaN where a component has
    /// not yet varied across paths.
    pub empirical: Vec<Vec<f64>>,
    pub theoretical: Vec<Vec<f64>>,
}

impl CorrelationCurve {
    /// `t,pair_i,pair_j,empirical,theoretical` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,pair_i,pair_j,empirical,theoretical")?;
        for (k, t) in self.times.iter().enumerate() {
            for (q, (i, j)) in self.pairs.iter().enumerate() {
                writeln!(
                    out,
                    "{t:.9},{i},{j},{:.9},{:.9}",
                    self.empirical[k][q], self.theoretical[k][q]
                )?;
            }
        }
        Ok(())
    }
}

/// Correlation curve of `paths` on `t_k = k * H / G`, `k = 1..=G`, where `H`
/// is the path horizon and `G = 100 m` for `m = H / horizon` intervals.
/// `rho` is the terminal correlation matrix at `horizon`.
pub fn correlation_curve(
    paths: &EventPaths,
    rho: &CorrelationMatrix,
    horizon: f64,
) -> Result<CorrelationCurve> {
    check_horizon(horizon)?;
    let dim = paths.dim();
    if rho.dim() != dim {
        return Err(Error::config("terminal correlation and paths differ in dimension"));
    }
    let m = (paths.horizon() / horizon).round().max(1.0) as usize;
    let grid = CURVE_POINTS_PER_INTERVAL * m;
    let total = paths.horizon();
    let times: Vec<f64> = (1..=grid).map(|k| k as f64 * total / grid as f64).collect();

    let n = paths.n_paths();
    let chunks = n.clamp(1, 256);
    // One pass per path: walk each component's sorted arrivals along the grid.
    let partial = par::map_range(chunks, |c| {
        let mut acc: Vec<CountMoments> = (0..grid).map(|_| CountMoments::new(dim)).collect();
        let mut counts = vec![vec![0u64; dim]; grid];
        for p in c * n / chunks..(c + 1) * n / chunks {
            for j in 0..dim {
                let arr = paths.arrivals(p, j);
                let mut seen = 0usize;
                for (k, &t) in times.iter().enumerate() {
                    while seen < arr.len() && arr[seen] <= t {
                        seen += 1;
                    }
                    counts[k][j] = seen as u64;
                }
            }
            for (a, cnt) in acc.iter_mut().zip(&counts) {
                a.add(cnt);
            }
        }
        acc
    });
    let mut moments: Vec<CountMoments> = (0..grid).map(|_| CountMoments::new(dim)).collect();
    for part in &partial {
        for (a, b) in moments.iter_mut().zip(part) {
            a.merge(b);
        }
    }

    let pairs: Vec<(usize, usize)> = upper_pairs(dim).collect();
    let mut empirical = Vec::with_capacity(grid);
    let mut theoretical = Vec::with_capacity(grid);
    for (k, &t) in times.iter().enumerate() {
        let emp = moments[k].correlation().ok();
        empirical.push(
            pairs
                .iter()
                .map(|&(i, j)| emp.as_ref().map_or(f64::NAN, |c| c.get(i, j)))
                .collect(),
        );
        theoretical.push(
            pairs
                .iter()
                .map(|&(i, j)| theoretical_corr(rho.get(i, j), t, horizon))
                .collect(),
        );
    }
    Ok(CorrelationCurve {
        times,
        pairs,
        empirical,
        theoretical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::build_mixture;
    use crate::ejd::{compute_all_extreme_measures, compute_extreme_measure, MonotonicityVector};
    use crate::marginals::{truncate, DiscreteMarginal};

    fn mixture(means: &[f64], eps: f64, k: usize) -> MixtureMeasure {
        let ms: Vec<_> = means
            .iter()
            .map(|&m| truncate(&DiscreteMarginal::poisson(m, 1.0).unwrap(), eps).unwrap())
            .collect();
        let measures = compute_all_extreme_measures(&ms).unwrap();
        MixtureMeasure::single(measures[k].clone())
    }

    #[test]
    fn theoretical_curve_shape() {
        let rho = 0.9;
        assert_eq!(theoretical_corr(rho, 0.0, 1.0), 0.0);
        assert!((theoretical_corr(rho, 0.5, 1.0) - 0.45).abs() < 1e-15);
        assert!((theoretical_corr(rho, 1.0, 1.0) - rho).abs() < 1e-15);
        assert!((theoretical_corr(rho, 2.0, 1.0) - rho).abs() < 1e-15);
        assert!((theoretical_corr(rho, 1.5, 1.0) - rho * 5.0 / 6.0).abs() < 1e-15);
        // continuity from the left at 2T and 3T
        for n in [2.0, 3.0] {
            assert!((theoretical_corr(rho, n - 1e-9, 1.0) - rho).abs() < 1e-8);
        }
        // dips shrink with n
        let dip = |n: f64| rho - theoretical_corr(rho, n + 0.5, 1.0);
        assert!(dip(5.0) < dip(1.0) && dip(5.0) > 0.0);
        assert!(theoretical_corr(rho, -1.0, 1.0).is_nan());
    }

    #[test]
    fn paths_are_sorted_and_bounded() {
        let mix = mixture(&[3.0, 5.0], 1e-8, 0);
        let paths = backward_simulate(&mix, 2.0, 500, 7).unwrap_err();
        assert!(matches!(paths, Error::Domain(_)));
        let paths = backward_simulate(&mix, 1.0, 500, 7).unwrap();
        assert_eq!(paths.n_paths(), 500);
        for p in 0..500 {
            for j in 0..2 {
                let a = paths.arrivals(p, j);
                assert!(a.windows(2).all(|w| w[0] <= w[1]));
                assert!(a.iter().all(|&t| (0.0..=1.0).contains(&t)));
            }
        }
    }

    #[test]
    fn point_mass_marginals_give_empty_paths() {
        let zero = truncate(&DiscreteMarginal::explicit(vec![1.0]).unwrap(), 0.01).unwrap();
        let m = compute_extreme_measure(
            &[zero.clone(), zero],
            &MonotonicityVector::new(vec![0, 0]).unwrap(),
        )
        .unwrap();
        // explicit marginals are rejected: the process law is unspecified
        assert!(backward_simulate(&MixtureMeasure::single(m), 1.0, 10, 1).is_err());
    }

    #[test]
    fn forward_continuation_keeps_prefix() {
        let mix = mixture(&[3.0, 5.0], 1e-8, 0);
        let paths = backward_simulate(&mix, 1.0, 200, 11).unwrap();
        assert_eq!(forward_continue(&paths, &mix, 1.0, 1, 3).unwrap(), paths);
        assert!(forward_continue(&paths, &mix, 1.0, 0, 3).is_err());
        let ext = forward_continue(&paths, &mix, 1.0, 3, 3).unwrap();
        assert_eq!(ext.horizon(), 3.0);
        for p in 0..200 {
            for j in 0..2 {
                let a = ext.arrivals(p, j);
                assert_eq!(&a[..paths.arrivals(p, j).len()], paths.arrivals(p, j));
                assert!(a.windows(2).all(|w| w[0] <= w[1]));
                assert!(a.iter().all(|&t| (0.0..=3.0).contains(&t)));
            }
        }
    }

    #[test]
    fn counts_moments_match_direct_formula() {
        let mut m = CountMoments::new(2);
        for c in [[1u64, 2], [3, 1], [0, 0], [4, 5]] {
            m.add(&c);
        }
        // x = (1,3,0,4), y = (2,1,0,5): cov = (1*2+3+0+20 - 8*8/4)/3 = 3
        assert!((m.covariance(0, 1) - 3.0).abs() < 1e-12);
        assert!((m.covariance(1, 0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_paths_have_undefined_correlation() {
        let mix = mixture(&[3.0, 5.0], 1e-8, 0);
        let paths = backward_simulate(&mix, 1.0, 100, 5).unwrap();
        assert!(matches!(
            empirical_correlation(&paths, 0.0),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(empirical_correlation(&paths, 1.5).is_err());
    }

    #[test]
    fn curve_grid_and_csv() {
        let mix = mixture(&[3.0, 5.0], 1e-8, 0);
        let paths = backward_simulate(&mix, 1.0, 2000, 5).unwrap();
        let ext = forward_continue(&paths, &mix, 1.0, 2, 6).unwrap();
        let rho = crate::moments::correlation_matrix(&mix).unwrap();
        let curve = correlation_curve(&ext, &rho, 1.0).unwrap();
        assert_eq!(curve.times.len(), 200);
        assert!((curve.times[99] - 1.0).abs() < 1e-15);
        assert!((curve.theoretical[199][0] - rho.get(0, 1)).abs() < 1e-12);
        let direct = empirical_correlation(&ext, curve.times[149]).unwrap();
        assert!((curve.empirical[149][0] - direct.get(0, 1)).abs() < 1e-12);
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,pair_i,pair_j,empirical,theoretical\n"));
        assert_eq!(text.lines().count(), 201);
    }

    #[test]
    fn csv_layout() {
        let mix = mixture(&[0.5, 0.5], 1e-8, 0);
        let paths = backward_simulate(&mix, 1.0, 3, 1).unwrap();
        let mut buf = Vec::new();
        paths.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("path_id,component,arrival_time"));
        assert_eq!(lines.count(), paths.total_events());
        for line in text.lines().skip(1) {
            let t = line.rsplit(',').next().unwrap();
            assert_eq!(t.split('.').nth(1).unwrap().len(), 9);
        }
    }

    #[test]
    fn mixture_paths_follow_weights() {
        let ms: Vec<_> = [2.0, 4.0]
            .iter()
            .map(|&m| truncate(&DiscreteMarginal::poisson(m, 1.0).unwrap(), 1e-10).unwrap())
            .collect();
        let measures = compute_all_extreme_measures(&ms).unwrap();
        let mix = build_mixture(&[0.5, 0.5], &measures).unwrap();
        let paths = backward_simulate(&mix, 1.0, 20_000, 3).unwrap();
        let est = empirical_correlation_with_se(&paths, 1.0, 100).unwrap();
        let target = crate::moments::correlation_matrix(&mix).unwrap();
        assert!((est.estimate.get(0, 1) - target.get(0, 1)).abs() < 4.0 * est.std_error[(0, 1)]);
    }
}
