//! Oriented lattice paths on tori and the tail of their intersection count.
//!
//! Between `u` and `v` every coordinate moves monotonically along its
//! shortest cyclic direction; a path is a uniformly random interleaving of
//! those unit steps. Two independent paths meet at some number of interior
//! vertices, and a geometric tail `P(X >= k) ~ c^k` is fitted to that count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Family, Graph};
use crate::rng::StreamRng;
use crate::stats::linear_fit;
use crate::{Error, Exec, Result, Seed};

/// Tail cells with fewer pairs than this are left out of the fit.
pub const MIN_CELL_COUNT: u64 = 30;
/// Fewest tail cells a fit may use.
pub const MIN_FIT_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedPath {
    pub vertices: Vec<usize>,
}

impl OrientedPath {
    pub fn length(&self) -> usize {
        self.vertices.len() - 1
    }
}

fn torus_shape(g: &Graph) -> Result<(usize, usize)> {
    match g.family() {
        Family::Torus { side, dim } => Ok((*side, *dim)),
        _ => Err(Error::WrongFamily { expected: "torus" }),
    }
}

/// Signed shortest displacement from `a` to `b` on `Z/side`; a tie at
/// exactly `side / 2` goes in the positive direction.
pub fn displacement(side: usize, a: usize, b: usize) -> i64 {
    let d = (b + side - a) % side;
    if 2 * d <= side {
        d as i64
    } else {
        d as i64 - side as i64
    }
}

fn coords(side: usize, dim: usize, mut x: usize) -> Vec<usize> {
    (0..dim)
        .map(|_| {
            let c = x % side;
            x /= side;
            c
        })
        .collect()
}

struct Plan {
    side: usize,
    u: usize,
    /// Per coordinate: (stride, step count, positive direction).
    axes: Vec<(usize, usize, bool)>,
    length: usize,
}

impl Plan {
    fn new(g: &Graph, u: usize, v: usize) -> Result<Plan> {
        let (side, dim) = torus_shape(g)?;
        if u >= g.n() || v >= g.n() {
            return Err(Error::param(
                "u, v",
                format!("vertex out of range for n = {}", g.n()),
            ));
        }
        if u == v {
            return Err(Error::param("u, v", "endpoints must differ"));
        }
        let (cu, cv) = (coords(side, dim, u), coords(side, dim, v));
        let mut stride = 1;
        let mut axes = Vec::with_capacity(dim);
        for i in 0..dim {
            let d = displacement(side, cu[i], cv[i]);
            axes.push((stride, d.unsigned_abs() as usize, d > 0));
            stride *= side;
        }
        let length = axes.iter().map(|a| a.1).sum();
        Ok(Plan {
            side,
            u,
            axes,
            length,
        })
    }

    fn moving_axes(&self) -> usize {
        self.axes.iter().filter(|a| a.1 > 0).count()
    }

    fn sample_into(&self, rng: &mut StreamRng, out: &mut Vec<usize>) {
        let side = self.side;
        let mut left: Vec<usize> = self.axes.iter().map(|a| a.1).collect();
        let mut x = self.u;
        out.clear();
        out.push(x);
        for remaining in (1..=self.length).rev() {
            let mut r = rng.random_range(0..remaining);
            let mut i = 0;
            while r >= left[i] {
                r -= left[i];
                i += 1;
            }
            left[i] -= 1;
            let (stride, _, up) = self.axes[i];
            let c = (x / stride) % side;
            x = if up {
                if c + 1 == side {
                    x - c * stride
                } else {
                    x + stride
                }
            } else if c == 0 {
                x + (side - 1) * stride
            } else {
                x - stride
            };
            out.push(x);
        }
    }
}

/// One uniformly random oriented path from `u` to `v`, from stream 0 of
/// `seed`.
pub fn sample_oriented_path(g: &Graph, u: usize, v: usize, seed: Seed) -> Result<OrientedPath> {
    let plan = Plan::new(g, u, v)?;
    let mut vertices = Vec::with_capacity(plan.length + 1);
    plan.sample_into(&mut seed.stream(0), &mut vertices);
    Ok(OrientedPath { vertices })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EITReport {
    pub u: usize,
    pub v: usize,
    pub path_length: usize,
    pub pairs_sampled: usize,
    /// `tail_counts[k]` = pairs sharing at least `k` interior vertices.
    pub tail_counts: Vec<u64>,
    pub c_hat: Option<f64>,
    /// Standard error of `c_hat` from the slope of the log-tail fit.
    pub c_hat_stderr: Option<f64>,
    pub fit_range: Option<(usize, usize)>,
    pub degenerate: bool,
    pub reason: Option<String>,
}

fn interior_overlap(a: &mut [usize], b: &mut [usize]) -> u32 {
    let (la, lb) = (a.len() - 1, b.len() - 1);
    let (a, b) = (&mut a[1..la], &mut b[1..lb]);
    a.sort_unstable();
    b.sort_unstable();
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                k += 1;
                i += 1;
                j += 1;
            }
        }
    }
    k
}

/// Samples `pair_samples` independent path pairs (pair `i` from stream `i`)
/// and fits `log tail_counts[k]` against `k` over the prefix of cells with
/// at least [`MIN_CELL_COUNT`] pairs.
pub fn eit_estimate(
    g: &Graph,
    u: usize,
    v: usize,
    pair_samples: usize,
    seed: Seed,
) -> Result<EITReport> {
    let plan = Plan::new(g, u, v)?;
    if pair_samples == 0 {
        return Err(Error::param("pair_samples", "need at least one pair"));
    }
    let overlaps = Exec::default().map_range(pair_samples, |i| {
        let mut rng = seed.stream(i as u64);
        let mut a = Vec::with_capacity(plan.length + 1);
        let mut b = Vec::with_capacity(plan.length + 1);
        plan.sample_into(&mut rng, &mut a);
        plan.sample_into(&mut rng, &mut b);
        interior_overlap(&mut a, &mut b)
    });
    let top = overlaps.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0u64; top + 1];
    for &k in &overlaps {
        hist[k as usize] += 1;
    }
    let mut tail_counts = hist;
    for k in (0..top).rev() {
        tail_counts[k] += tail_counts[k + 1];
    }

    let mut report = EITReport {
        u,
        v,
        path_length: plan.length,
        pairs_sampled: pair_samples,
        tail_counts,
        c_hat: None,
        c_hat_stderr: None,
        fit_range: None,
        degenerate: true,
        reason: None,
    };
    if plan.length <= 1 {
        report.reason = Some("path length <= 1".into());
        return Ok(report);
    }
    if plan.moving_axes() == 1 {
        report.c_hat = Some(1.0);
        report.reason = Some("unique path".into());
        return Ok(report);
    }
    let k_max = report
        .tail_counts
        .iter()
        .take_while(|&&c| c >= MIN_CELL_COUNT)
        .count();
    if k_max < MIN_FIT_POINTS {
        report.reason = Some(format!(
            "only {k_max} tail cells with at least {MIN_CELL_COUNT} pairs"
        ));
        return Ok(report);
    }
    let xs: Vec<f64> = (0..k_max).map(|k| k as f64).collect();
    let ys: Vec<f64> = report.tail_counts[..k_max]
        .iter()
        .map(|&c| (c as f64).ln())
        .collect();
    let fit = linear_fit(&xs, &ys).expect("at least three distinct abscissae");
    let c = fit.slope.exp();
    report.c_hat = Some(c);
    report.c_hat_stderr = Some(c * fit.slope_stderr);
    report.fit_range = Some((0, k_max - 1));
    report.degenerate = false;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::{make_cycle, make_hypercube, make_torus};

    fn idx(side: usize, xs: &[usize]) -> usize {
        xs.iter().rev().fold(0, |acc, &x| acc * side + x)
    }

    #[test]
    fn displacement_conventions() {
        assert_eq!(displacement(10, 0, 9), -1);
        assert_eq!(displacement(10, 0, 5), 5);
        assert_eq!(displacement(10, 5, 0), 5);
        assert_eq!(displacement(7, 0, 4), -3);
        assert_eq!(displacement(7, 2, 2), 0);
    }

    #[test]
    fn paths_are_geodesic_walks() {
        let g = make_torus(10, 4).unwrap();
        let (u, v) = (idx(10, &[1, 2, 3, 4]), idx(10, &[6, 0, 9, 4]));
        for s in 0..50 {
            let p = sample_oriented_path(&g, u, v, Seed(s)).unwrap();
            assert_eq!(p.vertices[0], u);
            assert_eq!(*p.vertices.last().unwrap(), v);
            assert_eq!(p.length(), 5 + 2 + 4);
            assert!(p.vertices.windows(2).all(|w| g.has_edge(w[0], w[1])));
            let mut seen = p.vertices.clone();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), p.vertices.len());
        }
    }

    #[test]
    fn wraps_the_short_way() {
        let g = make_torus(10, 4).unwrap();
        let p = sample_oriented_path(&g, 0, idx(10, &[9, 0, 0, 0]), Seed(0)).unwrap();
        assert_eq!(p.vertices, vec![0, 9]);
    }

    #[test]
    fn two_step_interleavings_are_fair() {
        let g = make_torus(10, 4).unwrap();
        let v = idx(10, &[1, 1, 0, 0]);
        let draws = 10_000;
        let first_axis0 = (0..draws)
            .filter(|&s| sample_oriented_path(&g, 0, v, Seed(s)).unwrap().vertices[1] == 1)
            .count() as f64;
        let e = draws as f64 / 2.0;
        let chi2 = 2.0 * (first_axis0 - e).powi(2) / e;
        // 99.9% point of chi-square with one degree of freedom.
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn degenerate_cases() {
        let g = make_torus(10, 4).unwrap();
        let r = eit_estimate(&g, 0, 1, 1000, Seed(1)).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.tail_counts, vec![1000]);

        let c = make_cycle(12).unwrap();
        let r = eit_estimate(&c, 0, 6, 500, Seed(1)).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.c_hat, Some(1.0));
        assert_eq!(r.reason.as_deref(), Some("unique path"));
        assert_eq!(r.tail_counts, vec![500; 6]);

        let q = make_hypercube(4).unwrap();
        assert_eq!(
            eit_estimate(&q, 0, 3, 10, Seed(1)),
            Err(Error::WrongFamily { expected: "torus" })
        );
        assert!(eit_estimate(&g, 5, 5, 10, Seed(1)).is_err());
    }

    #[test]
    fn tails_decay_in_four_dimensions() {
        let g = make_torus(10, 4).unwrap();
        let r = eit_estimate(&g, 0, idx(10, &[5, 5, 5, 5]), 20_000, Seed(4)).unwrap();
        assert!(r.tail_counts.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(r.tail_counts[0], 20_000);
        assert!(!r.degenerate);
        let c = r.c_hat.unwrap();
        assert!(c > 0.0 && c < 1.0, "{r:?}");
    }

    #[test]
    fn two_dimensional_square_overlap_matches_direct_count() {
        // (0,0) -> (1,1) on a 2-d torus: paths via (1,0) or (0,1); they share
        // the interior vertex exactly when they choose the same one.
        let g = make_torus(5, 2).unwrap();
        let r = eit_estimate(&g, 0, 6, 4000, Seed(2)).unwrap();
        assert_eq!(r.tail_counts.len(), 2);
        let frac = r.tail_counts[1] as f64 / 4000.0;
        assert!(
            (frac - 0.5).abs() < 4.0 * (0.25f64 / 4000.0).sqrt(),
            "{frac}"
        );
    }
}
