//! Discrete marginal laws and their finite-support truncation.
//!
//! A [`TruncatedMarginal`] keeps the pmf on `0..=I*` where `I*` is the first
//! index whose upper tail `1 - F(I*)` is at most `epsilon`. The cut-off tail
//! mass is lumped into `I*`, so the truncated CDF reaches exactly one there.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Tolerance on the total mass of an explicit pmf.
pub const EXPLICIT_MASS_TOL: f64 = 1e-12;

/// A marginal law before truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DiscreteMarginal {
    /// Poisson counts of a process with intensity `lambda` observed over `horizon`.
    Poisson { lambda: f64, horizon: f64 },
    /// Probabilities of `0, 1, 2, ...` listed explicitly.
    Explicit { pmf: Vec<f64> },
}

impl DiscreteMarginal {
    pub fn poisson(lambda: f64, horizon: f64) -> Result<Self> {
        let m = DiscreteMarginal::Poisson { lambda, horizon };
        m.validate()?;
        Ok(m)
    }

    pub fn explicit(pmf: Vec<f64>) -> Result<Self> {
        let m = DiscreteMarginal::Explicit { pmf };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DiscreteMarginal::Poisson { lambda, horizon } => {
                let mean = lambda * horizon;
                if !(lambda.is_finite() && horizon.is_finite() && *lambda > 0.0 && *horizon > 0.0)
                    || !(mean > 0.0 && mean.is_finite())
                {
                    return Err(Error::domain(format!(
                        "Poisson marginal needs lambda > 0 and horizon > 0, got lambda={lambda}, horizon={horizon}"
                    )));
                }
                Ok(())
            }
            DiscreteMarginal::Explicit { pmf } => {
                if pmf.is_empty() {
                    return Err(Error::domain("explicit pmf is empty"));
                }
                if let Some((k, p)) = pmf
                    .iter()
                    .enumerate()
                    .find(|(_, p)| !p.is_finite() || **p < 0.0)
                {
                    return Err(Error::domain(format!("pmf entry {k} is invalid: {p}")));
                }
                let total = compensated_sum(pmf.iter().copied());
                if (total - 1.0).abs() > EXPLICIT_MASS_TOL {
                    return Err(Error::domain(format!(
                        "explicit pmf sums to {total}, expected 1"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Poisson mean `lambda * horizon`, if this is a Poisson marginal.
    pub fn poisson_mean(&self) -> Option<f64> {
        match self {
            DiscreteMarginal::Poisson { lambda, horizon } => Some(lambda * horizon),
            DiscreteMarginal::Explicit { .. } => None,
        }
    }
}

/// Finite-support approximation of a [`DiscreteMarginal`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedMarginal {
    source: DiscreteMarginal,
    epsilon: f64,
    support_max: usize,
    pmf: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl TruncatedMarginal {
    pub fn source(&self) -> &DiscreteMarginal {
        &self.source
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Largest support point `I*`.
    pub fn support_max(&self) -> usize {
        self.support_max
    }

    pub fn pmf_values(&self) -> &[f64] {
        &self.pmf
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// Probability of `k`, zero outside `0..=I*`.
    pub fn pmf(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        self.pmf.get(k as usize).copied().unwrap_or(0.0)
    }

    /// `P(X <= k)`: zero for negative `k`, one from `I*` on.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else if k as usize >= self.support_max {
            1.0
        } else {
            self.cdf[k as usize]
        }
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p))
    }

    pub fn second_moment(&self) -> f64 {
        compensated_sum(
            self.pmf
                .iter()
                .enumerate()
                .map(|(k, p)| (k as f64) * (k as f64) * p),
        )
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        compensated_sum(self.pmf.iter().enumerate().map(|(k, p)| {
            let d = k as f64 - m;
            d * d * p
        }))
    }
}

/// Poisson probability `e^{-λT} (λT)^k / k!`, evaluated in log space.
pub fn poisson_pmf(lambda_t: f64, k: u64) -> Result<f64> {
    if !(lambda_t > 0.0 && lambda_t.is_finite()) {
        return Err(Error::domain(format!(
            "Poisson mean must be positive and finite, got {lambda_t}"
        )));
    }
    let kf = k as f64;
    Ok((-lambda_t + kf * lambda_t.ln() - ln_gamma(kf + 1.0)).exp())
}

/// Truncate `marginal` at the first `I*` with `1 - F(I*) <= epsilon`.
pub fn truncate(marginal: &DiscreteMarginal, epsilon: f64) -> Result<TruncatedMarginal> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!(
            "truncation tolerance must lie in (0, 1), got {epsilon}"
        )));
    }
    marginal.validate()?;

    let mut pmf = match marginal {
        DiscreteMarginal::Poisson { lambda, horizon } => {
            poisson_head(lambda * horizon, epsilon)
        }
        DiscreteMarginal::Explicit { pmf } => explicit_head(pmf, epsilon),
    };

    // Lump the tail into I* so the last CDF value is exactly one.
    let last = pmf.len() - 1;
    let head = compensated_sum(pmf[..last].iter().copied());
    pmf[last] = (1.0 - head).max(0.0);

    let mut cdf = Vec::with_capacity(pmf.len());
    let mut acc = Neumaier::default();
    for &p in &pmf {
        acc.add(p);
        cdf.push(acc.total().min(1.0));
    }
    cdf[last] = 1.0;
    // Compensated partial sums are monotone up to the last ulp; enforce it.
    for k in 1..cdf.len() {
        if cdf[k] < cdf[k - 1] {
            cdf[k] = cdf[k - 1];
        }
    }

    Ok(TruncatedMarginal {
        source: marginal.clone(),
        epsilon,
        support_max: last,
        pmf,
        cdf,
    })
}

/// Free-function form of [`TruncatedMarginal::cdf`].
pub fn cdf(marginal: &TruncatedMarginal, k: i64) -> f64 {
    marginal.cdf(k)
}

fn poisson_head(mean: f64, epsilon: f64) -> Vec<f64> {
    // Beyond this index the remaining tail is far below any representable
    // epsilon; it bounds the loop when 1 - F stalls on rounding noise.
    let cap = (mean + 40.0 * mean.sqrt() + 100.0).ceil() as usize;
    let ln_mean = mean.ln();
    let mut log_p = -mean;
    let mut pmf = Vec::new();
    let mut acc = Neumaier::default();
    for k in 0..=cap {
        if k > 0 {
            log_p += ln_mean - (k as f64).ln();
        }
        let p = log_p.exp();
        pmf.push(p);
        acc.add(p);
        if 1.0 - acc.total() <= epsilon {
            break;
        }
    }
    pmf
}

fn explicit_head(pmf: &[f64], epsilon: f64) -> Vec<f64> {
    let mut acc = Neumaier::default();
    for (k, &p) in pmf.iter().enumerate() {
        acc.add(p);
        if 1.0 - acc.total() <= epsilon {
            return pmf[..=k].to_vec();
        }
    }
    pmf.to_vec()
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    for x in xs {
        acc.add(x);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pois(mean: f64, eps: f64) -> TruncatedMarginal {
        truncate(&DiscreteMarginal::poisson(mean, 1.0).unwrap(), eps).unwrap()
    }

    #[test]
    fn pmf_values() {
        assert!((poisson_pmf(1.0, 0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((poisson_pmf(3.0, 3).unwrap() - 0.224_041_807_655_387_7).abs() < 1e-12);
        assert!((poisson_pmf(5.0, 0).unwrap() - 0.006_737_946_999_085_467).abs() < 1e-15);
        assert!(matches!(poisson_pmf(0.0, 1), Err(Error::Domain(_))));
        assert!(matches!(poisson_pmf(-2.0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn pmf_large_mean_does_not_overflow() {
        let p = poisson_pmf(1e4, 10_000).unwrap();
        // e^-n n^n / n! at n = 1e4, evaluated in 30-digit arithmetic
        assert!((p - 0.003_989_389_558_962_826).abs() < 1e-12, "{p}");
        let m = pois(1e4, 1e-6);
        assert!((m.mean() - 1e4).abs() < 1e-2);
    }

    #[test]
    fn truncation_point_mass() {
        let m = truncate(&DiscreteMarginal::explicit(vec![1.0]).unwrap(), 0.01).unwrap();
        assert_eq!(m.support_max(), 0);
        assert_eq!(m.pmf_values(), &[1.0]);
    }

    #[test]
    fn truncation_index_for_poisson() {
        // cumulative sums: F(7) = 0.98810 < 0.99 <= F(8) = 0.99620
        assert_eq!(pois(3.0, 0.01).support_max(), 8);
        // oracle: first k with 1 - sum_{i<=k} e^-7 7^i / i! <= 0.01 is 14
        assert_eq!(pois(7.0, 0.01).support_max(), 14);
    }

    #[test]
    fn truncation_rejects_bad_epsilon() {
        let m = DiscreteMarginal::poisson(3.0, 1.0).unwrap();
        assert!(matches!(truncate(&m, 0.0), Err(Error::Domain(_))));
        assert!(matches!(truncate(&m, 1.0), Err(Error::Domain(_))));
        assert!(matches!(truncate(&m, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_marginals() {
        assert!(DiscreteMarginal::poisson(0.0, 1.0).is_err());
        assert!(DiscreteMarginal::poisson(1.0, -1.0).is_err());
        assert!(DiscreteMarginal::explicit(vec![]).is_err());
        assert!(DiscreteMarginal::explicit(vec![0.5, 0.4]).is_err());
        assert!(DiscreteMarginal::explicit(vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn cdf_conventions() {
        let m = truncate(&DiscreteMarginal::explicit(vec![0.3, 0.7]).unwrap(), 0.01).unwrap();
        assert_eq!(cdf(&m, -1), 0.0);
        assert!((cdf(&m, 0) - 0.3).abs() < 1e-15);
        assert_eq!(cdf(&m, 1), 1.0);
        assert_eq!(cdf(&m, 57), 1.0);
    }

    #[test]
    fn truncation_error_bound() {
        for &mean in &[0.5, 3.0, 7.0, 25.0] {
            for &eps in &[0.1, 0.01, 1e-5] {
                let m = pois(mean, eps);
                let top = m.support_max() as u64;
                let mut f = 0.0;
                for k in 0..top {
                    f += poisson_pmf(mean, k).unwrap();
                    assert!((f - m.cdf(k as i64)).abs() <= eps);
                }
                f += poisson_pmf(mean, top).unwrap();
                assert!(1.0 - f <= eps);
                assert!(top == 0 || 1.0 - (f - poisson_pmf(mean, top).unwrap()) > eps);
            }
        }
    }

    #[test]
    fn pmf_sum_matches_cdf_recursion() {
        let mean = 7.0;
        let m = pois(mean, 1e-9);
        // direct CDF recursion with an independent term update
        let mut term = (-mean).exp();
        let mut direct = term;
        let mut via_pmf = poisson_pmf(mean, 0).unwrap();
        for k in 1..m.support_max() as u64 {
            term *= mean / k as f64;
            direct += term;
            via_pmf += poisson_pmf(mean, k).unwrap();
        }
        assert!((direct - via_pmf).abs() < 1e-12);
    }

    #[test]
    fn zero_interior_entries_are_kept() {
        let m = truncate(
            &DiscreteMarginal::explicit(vec![0.25, 0.0, 0.0, 0.75]).unwrap(),
            1e-9,
        )
        .unwrap();
        assert_eq!(m.support_max(), 3);
        assert_eq!(m.cdf(1), m.cdf(2));
    }

    #[test]
    fn json_shape() {
        let p: DiscreteMarginal =
            serde_json::from_str(r#"{"kind":"poisson","lambda":3.0,"horizon":1.0}"#).unwrap();
        assert_eq!(p, DiscreteMarginal::Poisson { lambda: 3.0, horizon: 1.0 });
        let e: DiscreteMarginal =
            serde_json::from_str(r#"{"kind":"explicit","pmf":[0.5,0.5]}"#).unwrap();
        assert_eq!(e, DiscreteMarginal::Explicit { pmf: vec![0.5, 0.5] });
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cdf_is_monotone_and_normalised(mean in 0.05f64..60.0, eps in 1e-12f64..0.5) {
                let m = pois(mean, eps);
                prop_assert_eq!(m.cdf(-1), 0.0);
                prop_assert_eq!(m.cdf(m.support_max() as i64), 1.0);
                for k in 0..=m.support_max() as i64 {
                    prop_assert!(m.cdf(k) >= m.cdf(k - 1));
                    prop_assert!(m.pmf(k) >= 0.0);
                }
                let total: f64 = m.pmf_values().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
