//! Threshold estimators built on the percolation sampler.
//!
//! The threshold `p_alpha` is the `p` at which a cluster of size
//! `alpha * n` appears with probability 1/2. The event is increasing, so
//! `P_p(event) = P(T_alpha <= p)` for the Beta-coupled crossing value of a
//! sweep, and the sample median of `T_alpha` estimates `p_alpha` directly:
//! no bisection over `p`, and one sweep serves every `alpha` at once.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::percolation::{
    check_fraction, check_probability, cluster_ensemble, percolate_with, sweep_ensemble,
    CrossingSample, RankMapping,
};
use crate::stats::{self, linear_fit, mean_stderr, median_ci, median_sorted, Proportion};
use crate::union_find::UnionFind;
use crate::{Error, Exec, Graph, Result, Seed};

pub const DEFAULT_CI_LEVEL: f64 = 0.95;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Estimates are refused when more than this fraction of sweeps never
/// reach the target.
pub const MAX_NEVER_CROSSED: f64 = 0.01;

const BOOTSTRAP_TAG: u64 = 0xb007;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub alpha: f64,
    pub p_hat: f64,
    pub ci: (f64, f64),
    pub ci_level: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub never_crossed: usize,
}

fn crossing_column(samples: &[CrossingSample], i: usize) -> Result<(Vec<f64>, usize)> {
    let never = samples.iter().filter(|s| s.never_crossed(i)).count();
    if never as f64 > MAX_NEVER_CROSSED * samples.len() as f64 {
        return Err(Error::NeverCrossed {
            never,
            total: samples.len(),
        });
    }
    let col: Vec<f64> = samples.iter().map(|s| s.crossings[i]).collect();
    Ok((stats::sorted(&col), never))
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        Err(Error::param("n_samples", "need at least one sample"))
    } else {
        Ok(())
    }
}

/// Threshold estimates for several fractions from one shared set of
/// Beta-coupled sweeps.
pub fn estimate_thresholds(
    g: &Graph,
    alphas: &[f64],
    n_samples: usize,
    seed: Seed,
    ci_level: f64,
) -> Result<Vec<ThresholdEstimate>> {
    check_samples(n_samples)?;
    stats::check_level(ci_level)?;
    let samples = sweep_ensemble(
        g,
        alphas,
        RankMapping::Beta,
        n_samples,
        seed,
        Exec::default(),
    )?;
    thresholds_from_samples(&samples, alphas, ci_level, seed)
}

pub fn thresholds_from_samples(
    samples: &[CrossingSample],
    alphas: &[f64],
    ci_level: f64,
    seed: Seed,
) -> Result<Vec<ThresholdEstimate>> {
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let (sorted, never) = crossing_column(samples, i)?;
            Ok(ThresholdEstimate {
                alpha,
                p_hat: median_sorted(&sorted),
                ci: median_ci(&sorted, ci_level),
                ci_level,
                n_samples: samples.len(),
                seed: seed.0,
                never_crossed: never,
            })
        })
        .collect()
}

/// Sample median of Beta-coupled `T_alpha` with an order-statistic CI.
/// Fewer than 100 samples are accepted but give a wide interval.
pub fn estimate_threshold(
    g: &Graph,
    alpha: f64,
    n_samples: usize,
    seed: Seed,
    ci_level: f64,
) -> Result<ThresholdEstimate> {
    Ok(estimate_thresholds(g, &[alpha], n_samples, seed, ci_level)?.remove(0))
}

/// `theta_n(p)` estimated as `E[largest] / n` on a grid of `p` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCurve {
    pub p_grid: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: usize,
}

/// Largest cluster at each grid value, with all grid values coupled through
/// one set of edge weights. The weights are the same uniforms, in the same
/// order, that [`percolate_with`] draws, so each entry equals an
/// independent single-`p` sample from that stream.
fn largest_on_grid<R: Rng + ?Sized>(g: &Graph, p_grid: &[f64], rng: &mut R) -> Vec<usize> {
    let weights: Vec<f64> = (0..g.m()).map(|_| rng.random::<f64>()).collect();
    let mut order: Vec<u32> = (0..g.m() as u32).collect();
    order.sort_by(|&a, &b| weights[a as usize].total_cmp(&weights[b as usize]));
    let mut uf = UnionFind::new(g.n());
    let mut largest = usize::from(g.n() > 0);
    let mut next = 0;
    p_grid
        .iter()
        .map(|&p| {
            while next < order.len() && weights[order[next] as usize] < p {
                let (a, b) = g.edges()[order[next] as usize];
                if let Some(s) = uf.union(a, b) {
                    largest = largest.max(s as usize);
                }
                next += 1;
            }
            largest
        })
        .collect()
}

pub fn estimate_theta_curve(
    g: &Graph,
    p_grid: &[f64],
    n_samples: usize,
    seed: Seed,
) -> Result<ThetaCurve> {
    check_samples(n_samples)?;
    if p_grid.is_empty() {
        return Err(Error::param("p_grid", "grid is empty"));
    }
    for &p in p_grid {
        check_probability("p_grid", p)?;
    }
    if p_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("p_grid", "grid must be sorted ascending"));
    }
    let n = g.n() as f64;
    let per_sample: Vec<Vec<usize>> = if p_grid.len() == 1 {
        let st = cluster_ensemble(g, p_grid[0], &[], n_samples, seed, Exec::default())?;
        st.into_iter().map(|s| vec![s.largest]).collect()
    } else {
        Exec::default().map_range(n_samples, |i| {
            largest_on_grid(g, p_grid, &mut seed.stream(i as u64))
        })
    };
    let (mut theta_hat, mut stderr) = (Vec::new(), Vec::new());
    for j in 0..p_grid.len() {
        let col: Vec<f64> = per_sample.iter().map(|s| s[j] as f64 / n).collect();
        let (m, se) = mean_stderr(&col);
        theta_hat.push(m);
        stderr.push(se);
    }
    Ok(ThetaCurve {
        p_grid: p_grid.to_vec(),
        theta_hat,
        stderr,
        n_samples,
    })
}

/// Fraction of samples at `p` with exactly one cluster of size at least
/// `C n`, with a 95% Wilson interval.
pub fn uniqueness_probability(
    g: &Graph,
    p: f64,
    c: f64,
    n_samples: usize,
    seed: Seed,
) -> Result<Proportion> {
    check_samples(n_samples)?;
    check_fraction("C", c)?;
    let st = cluster_ensemble(g, p, &[c], n_samples, seed, Exec::default())?;
    let unique = st.iter().filter(|s| s.counts_at_least[0] == 1).count();
    Ok(Proportion::wilson(unique, n_samples, DEFAULT_CI_LEVEL))
}

/// `p_alpha2 - p_alpha1` for `alpha1 <= alpha2`, non-negative by
/// monotonicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub alpha1: f64,
    pub alpha2: f64,
    pub p_hat1: f64,
    pub p_hat2: f64,
    pub gap: f64,
    pub ci: (f64, f64),
    pub n_samples: usize,
    pub seed: u64,
    /// Always `p(alpha2) - p(alpha1)`; the opposite-sign convention would be
    /// negative.
    pub sign_convention: String,
}

/// Paired gap on shared sweeps with a percentile bootstrap CI
/// ([`BOOTSTRAP_RESAMPLES`] resamples).
pub fn threshold_gap(
    g: &Graph,
    alpha1: f64,
    alpha2: f64,
    n_samples: usize,
    seed: Seed,
) -> Result<GapEstimate> {
    check_samples(n_samples)?;
    check_fraction("alpha1", alpha1)?;
    check_fraction("alpha2", alpha2)?;
    if alpha1 > alpha2 {
        return Err(Error::param(
            "alpha1",
            format!("need alpha1 <= alpha2, got {alpha1} > {alpha2}"),
        ));
    }
    let samples = sweep_ensemble(
        g,
        &[alpha1, alpha2],
        RankMapping::Beta,
        n_samples,
        seed,
        Exec::default(),
    )?;
    gap_from_samples(&samples, alpha1, alpha2, seed)
}

pub fn gap_from_samples(
    samples: &[CrossingSample],
    alpha1: f64,
    alpha2: f64,
    seed: Seed,
) -> Result<GapEstimate> {
    let (s1, _) = crossing_column(samples, 0)?;
    let (s2, _) = crossing_column(samples, 1)?;
    let (p1, p2) = (median_sorted(&s1), median_sorted(&s2));
    let t1: Vec<f64> = samples.iter().map(|s| s.crossings[0]).collect();
    let t2: Vec<f64> = samples.iter().map(|s| s.crossings[1]).collect();
    let n = samples.len();
    let mut rng = seed.derive(BOOTSTRAP_TAG).stream(0);
    let mut boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let a = stats::sorted(&idx.iter().map(|&i| t1[i]).collect::<Vec<_>>());
            let b = stats::sorted(&idx.iter().map(|&i| t2[i]).collect::<Vec<_>>());
            median_sorted(&b) - median_sorted(&a)
        })
        .collect();
    boots.sort_by(|a, b| a.total_cmp(b));
    let tail = (1.0 - DEFAULT_CI_LEVEL) / 2.0;
    Ok(GapEstimate {
        alpha1,
        alpha2,
        p_hat1: p1,
        p_hat2: p2,
        gap: p2 - p1,
        ci: (
            stats::quantile_sorted(&boots, tail),
            stats::quantile_sorted(&boots, 1.0 - tail),
        ),
        n_samples: n,
        seed: seed.0,
        sign_convention: "p(alpha2) - p(alpha1) with alpha1 <= alpha2".into(),
    })
}

/// Scaling of the median largest cluster with graph size at a fixed `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub p: f64,
    pub sizes: Vec<usize>,
    /// Vertex counts of the generated graphs (may differ from `sizes` for
    /// families parameterised otherwise).
    pub n: Vec<usize>,
    pub medians: Vec<f64>,
    pub n_samples: usize,
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
}

/// For each size, draws `n_samples` fresh graphs from `family(size, seed)`
/// and one percolation sample on each, takes the median largest cluster,
/// and fits `log median` against `log n` by least squares.
pub fn critical_window_exponent<F>(
    family: F,
    sizes: &[usize],
    p: f64,
    n_samples: usize,
    seed: Seed,
) -> Result<ExponentFit>
where
    F: Fn(usize, Seed) -> Result<Graph> + Sync + Send,
{
    check_samples(n_samples)?;
    check_probability("p", p)?;
    if sizes.len() < 3 {
        return Err(Error::param("sizes", "need at least three sizes for a fit"));
    }
    let mut medians = Vec::with_capacity(sizes.len());
    let mut ns = Vec::with_capacity(sizes.len());
    for (si, &size) in sizes.iter().enumerate() {
        let size_seed = seed.derive(si as u64);
        let rows = Exec::default().try_map_range(n_samples, |i| {
            let g = family(size, size_seed.derive(i as u64))?;
            let st = percolate_with(&g, p, &mut size_seed.stream(i as u64), &[]);
            Ok::<_, Error>((g.n(), st.largest as f64))
        })?;
        ns.push(rows[0].0);
        let largest: Vec<f64> = rows.iter().map(|r| r.1).collect();
        medians.push(median_sorted(&stats::sorted(&largest)));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| Error::param("sizes", "sizes must differ"))?;
    Ok(ExponentFit {
        p,
        sizes: sizes.to_vec(),
        n: ns,
        medians,
        n_samples,
        slope: fit.slope,
        stderr: fit.slope_stderr,
        r2: fit.r2,
    })
}

/// Percolation probability of the 3-regular tree: with `x = (2p - 1)/p`
/// (the root of `x = p(2x - x^2)`), `theta(p) = 1 - (1 - x)^3` above 1/2,
/// zero below.
pub fn cubic_tree_theta(p: f64) -> f64 {
    if p <= 0.5 {
        0.0
    } else {
        let x = (2.0 * p - 1.0) / p;
        1.0 - (1.0 - x).powi(3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use crate::percolation::percolate_once;

    #[test]
    fn tree_theta_fixed_point() {
        assert_eq!(cubic_tree_theta(0.4), 0.0);
        assert!((cubic_tree_theta(0.6) - 19.0 / 27.0).abs() < 1e-15);
        // x solves x = p(2x - x^2) on a grid.
        for k in 51..100 {
            let p = k as f64 / 100.0;
            let x = (2.0 * p - 1.0) / p;
            assert!((x - p * (2.0 * x - x * x)).abs() < 1e-14);
        }
        assert!((cubic_tree_theta(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theta_extremes() {
        let g = make_torus(6, 2).unwrap();
        let c = estimate_theta_curve(&g, &[0.0, 1.0], 20, Seed(1)).unwrap();
        assert!((c.theta_hat[0] - 1.0 / 36.0).abs() < 1e-15);
        assert_eq!(c.theta_hat[1], 1.0);
        assert!(estimate_theta_curve(&g, &[], 20, Seed(1)).is_err());
        assert!(estimate_theta_curve(&g, &[0.5, 0.2], 20, Seed(1)).is_err());
    }

    #[test]
    fn grid_sweep_matches_single_p_samples() {
        let g = make_cycle_matching(100, Seed(4)).unwrap();
        let grid = [0.1, 0.3, 0.5, 0.7];
        for s in 0..20u64 {
            let coupled = largest_on_grid(&g, &grid, &mut Seed(s).stream(0));
            for (j, &p) in grid.iter().enumerate() {
                assert_eq!(
                    coupled[j],
                    percolate_once(&g, p, Seed(s), &[]).unwrap().largest
                );
            }
        }
    }

    #[test]
    fn theta_monotone_within_noise() {
        let g = make_torus(10, 2).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let c = estimate_theta_curve(&g, &grid, 200, Seed(3)).unwrap();
        for w in 0..grid.len() - 1 {
            assert!(c.theta_hat[w + 1] + 2.0 * c.stderr[w + 1] >= c.theta_hat[w]);
        }
    }

    #[test]
    fn uniqueness_extremes() {
        let g = make_torus(5, 2).unwrap();
        assert_eq!(
            uniqueness_probability(&g, 1.0, 0.3, 50, Seed(1))
                .unwrap()
                .estimate,
            1.0
        );
        assert_eq!(
            uniqueness_probability(&g, 0.0, 0.5, 50, Seed(1))
                .unwrap()
                .estimate,
            0.0
        );
    }

    #[test]
    fn gap_is_paired_and_nonnegative() {
        let g = make_cycle(4).unwrap();
        let same = threshold_gap(&g, 0.5, 0.5, 500, Seed(2)).unwrap();
        assert_eq!(same.gap, 0.0);
        assert_eq!(same.ci, (0.0, 0.0));
        let samples = sweep_ensemble(
            &g,
            &[0.5, 0.75],
            RankMapping::Beta,
            500,
            Seed(2),
            Exec::default(),
        )
        .unwrap();
        assert!(samples.iter().all(|s| s.crossings[1] >= s.crossings[0]));
        assert!(threshold_gap(&g, 0.8, 0.5, 10, Seed(2)).is_err());
    }

    #[test]
    fn reproducible_across_exec_modes() {
        let g = make_hypercube(7).unwrap();
        let a = sweep_ensemble(
            &g,
            &[0.1, 0.5],
            RankMapping::Beta,
            64,
            Seed(9),
            Exec::Parallel,
        )
        .unwrap();
        let b = sweep_ensemble(
            &g,
            &[0.1, 0.5],
            RankMapping::Beta,
            64,
            Seed(9),
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!(a, b);
        let ta = thresholds_from_samples(&a, &[0.1, 0.5], 0.95, Seed(9)).unwrap();
        assert!(ta[0].p_hat <= ta[1].p_hat);
        for t in &ta {
            assert!(t.ci.0 <= t.p_hat && t.p_hat <= t.ci.1);
        }
    }

    #[test]
    fn refuses_disconnected() {
        let g = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (3, 4)],
            crate::Family::Custom { name: "x".into() },
        )
        .unwrap();
        assert!(matches!(
            estimate_threshold(&g, 0.9, 200, Seed(1), 0.95),
            Err(Error::NeverCrossed { .. })
        ));
    }

    #[test]
    fn exponent_needs_three_sizes() {
        let gen = |n: usize, s: Seed| make_random_regular(n, 3, s);
        assert!(critical_window_exponent(gen, &[100, 200], 0.5, 10, Seed(1)).is_err());
    }
}
