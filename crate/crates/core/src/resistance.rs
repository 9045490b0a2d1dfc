//! Effective resistance with unit edge conductances, by preconditioned
//! conjugate gradients on the graph Laplacian.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{is_connected, Graph};
use crate::stats::{quantile_sorted, sorted};
use crate::{Error, Exec, Result, Seed};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Iteration cap, as a multiple of the vertex count.
pub const MAX_ITER_FACTOR: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistanceResult {
    pub u: usize,
    pub v: usize,
    pub r_eff: f64,
    pub iterations: usize,
    /// Final `||L x - (e_u - e_v)||`.
    pub residual_norm: f64,
}

fn laplacian_apply(g: &Graph, x: &[f64], out: &mut [f64]) {
    for (w, o) in out.iter_mut().enumerate() {
        let mut acc = g.degree(w) as f64 * x[w];
        for &z in g.neighbors(w) {
            acc -= x[z as usize];
        }
        *o = acc;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Voltage drop between `u` and `v` when unit current enters at `u` and
/// leaves at `v`. Stops once the residual falls to `tol * sqrt(2)`.
pub fn effective_resistance(g: &Graph, u: usize, v: usize, tol: f64) -> Result<ResistanceResult> {
    check_pair(g, u, v)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    solve(g, u, v, tol)
}

fn check_pair(g: &Graph, u: usize, v: usize) -> Result<()> {
    if u >= g.n() || v >= g.n() {
        return Err(Error::param(
            "u, v",
            format!("vertex out of range for n = {}", g.n()),
        ));
    }
    if u == v {
        return Err(Error::param("u, v", "endpoints must differ"));
    }
    Ok(())
}

fn solve(g: &Graph, u: usize, v: usize, tol: f64) -> Result<ResistanceResult> {
    let n = g.n();
    let inv_diag: Vec<f64> = (0..n).map(|w| 1.0 / g.degree(w) as f64).collect();
    let mut b = vec![0.0; n];
    b[u] = 1.0;
    b[v] = -1.0;
    let target = tol * std::f64::consts::SQRT_2;

    // b has zero mean, so the residual stays in the range of L and the
    // iteration never sees the null space except through x's mean.
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut lp = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt();
    let cap = MAX_ITER_FACTOR * n;
    let mut it = 0;
    while res > target {
        if it == cap {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        laplacian_apply(g, &p, &mut lp);
        let alpha = rz / dot(&p, &lp);
        for w in 0..n {
            x[w] += alpha * p[w];
            r[w] -= alpha * lp[w];
        }
        for w in 0..n {
            z[w] = r[w] * inv_diag[w];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for w in 0..n {
            p[w] = z[w] + beta * p[w];
        }
        res = dot(&r, &r).sqrt();
        it += 1;
    }
    Ok(ResistanceResult {
        u,
        v,
        r_eff: x[u] - x[v],
        iterations: it,
        residual_norm: res,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceProfile {
    pub pair_count: usize,
    pub seed: u64,
    pub tol: f64,
    pub max: f64,
    pub mean: f64,
    /// `(level, value)` at the 10%, 50% and 90% levels.
    pub quantiles: Vec<(f64, f64)>,
    pub results: Vec<ResistanceResult>,
}

pub const PROFILE_LEVELS: [f64; 3] = [0.1, 0.5, 0.9];

/// Uniform pairs `u != v`, drawn sequentially from stream 0 of `seed`.
pub fn sample_pairs(n: usize, count: usize, seed: Seed) -> Vec<(usize, usize)> {
    let mut rng = seed.stream(0);
    (0..count)
        .map(|_| {
            let u = rng.random_range(0..n);
            let mut v = rng.random_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            (u, v)
        })
        .collect()
}

/// Resistance over `pair_count` random pairs. Solver failures carry the
/// pair they occurred on.
pub fn resistance_profile(
    g: &Graph,
    pair_count: usize,
    seed: Seed,
    tol: f64,
) -> Result<ResistanceProfile> {
    if pair_count == 0 {
        return Err(Error::param("pair_count", "need at least one pair"));
    }
    if g.n() < 2 {
        return Err(Error::param("graph", "need at least two vertices"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let pairs = sample_pairs(g.n(), pair_count, seed);
    let results = Exec::default().try_map_range(pairs.len(), |i| {
        let (u, v) = pairs[i];
        solve(g, u, v, tol).map_err(|e| Error::AtPair {
            u,
            v,
            source: Box::new(e),
        })
    })?;
    let values: Vec<f64> = results.iter().map(|r| r.r_eff).collect();
    let s = sorted(&values);
    Ok(ResistanceProfile {
        pair_count,
        seed: seed.0,
        tol,
        max: s[s.len() - 1],
        mean: values.iter().sum::<f64>() / values.len() as f64,
        quantiles: PROFILE_LEVELS
            .iter()
            .map(|&q| (q, quantile_sorted(&s, q)))
            .collect(),
        results,
    })
}
