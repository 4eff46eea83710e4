//! Goodness-of-fit tests used to validate simulated output.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Minimum expected count for a cell to stand on its own.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    /// Degrees of freedom (chi-square) or sample size (KS).
    pub dof: f64,
    pub p_value: f64,
}

impl TestOutcome {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson chi-square test of `observed` counts against cell probabilities.
///
/// Cells with expected count below [`MIN_EXPECTED`] are pooled into one; if the
/// pool itself is still too small it is merged into the smallest regular cell.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> Result<TestOutcome> {
    if observed.len() != probs.len() {
        return Err(Error::domain(format!(
            "{} observed cells for {} probabilities",
            observed.len(),
            probs.len()
        )));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::domain("chi-square test needs at least one observation"));
    }
    let total_p: f64 = probs.iter().sum();
    let scale = n as f64 / total_p;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * scale;
        if e >= MIN_EXPECTED {
            cells.push((o as f64, e));
        } else {
            pool.0 += o as f64;
            pool.1 += e;
        }
    }
    if pool.1 >= MIN_EXPECTED || (cells.is_empty() && pool.1 > 0.0) {
        cells.push(pool);
    } else if pool.1 > 0.0 || pool.0 > 0.0 {
        let k = (0..cells.len())
            .min_by(|&a, &b| cells[a].1.total_cmp(&cells[b].1))
            .expect("nonempty");
        cells[k].0 += pool.0;
        cells[k].1 += pool.1;
    }
    if cells.len() < 2 {
        return Err(Error::domain("chi-square test needs at least two cells"));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (cells.len() - 1) as f64;
    let dist = ChiSquared::new(dof).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(TestOutcome {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Asymptotic Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // series converges slowly here and the value is 1 to double precision
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test of `samples` against Uniform(lo, hi).
/// Sorts `samples` in place.
pub fn ks_uniform(samples: &mut [f64], lo: f64, hi: f64) -> Result<TestOutcome> {
    if samples.is_empty() {
        return Err(Error::domain("KS test needs at least one sample"));
    }
    if !(hi > lo) {
        return Err(Error::domain(format!("empty interval [{lo}, {hi}]")));
    }
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    Ok(TestOutcome {
        statistic: d,
        dof: n,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
    })
}
