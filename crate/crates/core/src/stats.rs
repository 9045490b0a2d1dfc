//! Small statistics toolkit for ensemble summaries.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use crate::{Error, Result};

/// Two-sided standard-normal quantile for a confidence level.
pub fn z_for(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "ci_level",
            format!("must lie in (0, 1), got {level}"),
        ))
    }
}

/// Median of sorted data (mean of the middle pair for even lengths).
pub fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "median of empty data");
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Distribution-free confidence interval for the median from order
/// statistics: `[X_(j), X_(n+1-j)]` with `j` the largest index such that
/// `P(Bin(n, 1/2) <= j - 1) <= (1 - level) / 2`. Falls back to the sample
/// range when `n` is too small for the requested level.
pub fn median_ci(sorted: &[f64], level: f64) -> (f64, f64) {
    let n = sorted.len();
    assert!(n > 0, "median CI of empty data");
    let tail = (1.0 - level) / 2.0;
    let bin = Binomial::new(0.5, n as u64).expect("valid binomial");
    // cdf(j - 1) is increasing in j; binary search the last j that fits.
    let (mut lo, mut hi) = (0usize, n / 2 + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if bin.cdf(mid as u64 - 1) <= tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let j = lo.max(1);
    (sorted[j - 1], sorted[n - j])
}

/// Linear interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Sample mean and its standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// A proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn wilson(successes: usize, trials: usize, level: f64) -> Proportion {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let phat = successes as f64 / n;
        let z = z_for(level);
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (phat + z2 / (2.0 * n)) / denom;
        let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion {
            successes,
            trials,
            estimate: phat,
            lo: (centre - half).max(0.0),
            hi: (centre + half).min(1.0),
        }
    }

    /// Binomial standard error of the estimate.
    pub fn stderr(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}

/// Ordinary least squares `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median_sorted(&[1.0, 2.0, 9.0]), 2.0);
        assert_eq!(median_sorted(&[1.0, 2.0, 4.0, 9.0]), 3.0);
    }

    #[test]
    fn median_ci_brackets_and_matches_tables() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let (lo, hi) = median_ci(&xs, 0.95);
        // Standard table for n = 100 at 95%: ranks 40 and 61.
        assert_eq!((lo, hi), (40.0, 61.0));
        assert!(lo <= median_sorted(&xs) && median_sorted(&xs) <= hi);
        let tiny = [1.0, 2.0, 3.0];
        assert_eq!(median_ci(&tiny, 0.95), (1.0, 3.0));
    }

    #[test]
    fn wilson_known_value() {
        let p = Proportion::wilson(7, 8, 0.95);
        assert!(
            (p.lo - 0.5291).abs() < 1e-3 && (p.hi - 0.9776).abs() < 1e-3,
            "{p:?}"
        );
        let zero = Proportion::wilson(0, 50, 0.95);
        assert_eq!(zero.lo, 0.0);
        assert!(zero.hi > 0.0);
    }

    #[test]
    fn fit_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 + 2.0 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 0.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12 && f.slope_stderr.abs() < 1e-6);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn quantiles() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.5), 2.0);
        assert_eq!(quantile_sorted(&xs, 0.1), 0.4);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
    }
}
