//! Isoperimetry: the edge-expansion (Cheeger) constant, the exponent
//! `delta(G) = sup { a : |dS| >= |S|^a for all |S| <= n/2 }`, and the
//! spectral lower bound on the Cheeger constant.
//!
//! `dS` is the edge boundary: edges with exactly one endpoint in `S`.

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::default_diameter;
use super::{is_connected, Graph};
use crate::{Error, Result, Seed};

/// Exhaustive subset enumeration is attempted up to this many vertices.
pub const EXACT_CHEEGER_MAX_N: usize = 24;

const EIGEN_TOL: f64 = 1e-8;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerReport {
    /// `min |dS| / |S|` over `1 <= |S| <= n/2`, exact.
    pub h_exact: Option<Ratio<u64>>,
    pub h_witness: Option<Vec<u32>>,
    /// `d_min * lambda_2 / 2` with `lambda_2` the second-smallest eigenvalue
    /// of the normalised Laplacian; absent if the eigensolver did not
    /// converge.
    pub h_spectral_lb: Option<f64>,
    pub lambda2: Option<f64>,
    /// `min log|dS| / log|S|` over `2 <= |S| <= n/2`.
    pub delta_exact: Option<f64>,
    pub delta_witness: Option<Vec<u32>>,
    pub diameter: usize,
    pub diameter_exact: bool,
    /// Best available lower bound on `h` is at least `1 / diameter`.
    pub h_ge_inv_diam: bool,
}

impl CheegerReport {
    pub fn h_exact_f64(&self) -> Option<f64> {
        self.h_exact.map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

pub fn cheeger_report(g: &Graph) -> Result<CheegerReport> {
    if g.n() < 2 {
        return Err(Error::InvalidGraph("need at least two vertices".into()));
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let diam = default_diameter(g)?;
    let exact = (g.n() <= EXACT_CHEEGER_MAX_N).then(|| enumerate_subsets(g));
    let lambda2 = normalized_lambda2(g);
    let h_spectral_lb = lambda2.map(|l| g.min_degree() as f64 * (l - EIGEN_TOL).max(0.0) / 2.0);

    let inv_diam = Ratio::new(1u64, diam.value.max(1) as u64);
    let h_ge_inv_diam = match (&exact, h_spectral_lb) {
        (Some(e), _) => e.h >= inv_diam,
        (None, Some(lb)) => lb >= 1.0 / diam.value.max(1) as f64,
        (None, None) => false,
    };
    let (h_exact, h_witness, delta_exact, delta_witness) = match exact {
        Some(e) => (
            Some(e.h),
            Some(mask_to_set(e.h_mask)),
            e.delta.map(|(d, _)| d),
            e.delta.map(|(_, m)| mask_to_set(m)),
        ),
        None => (None, None, None, None),
    };
    Ok(CheegerReport {
        h_exact,
        h_witness,
        h_spectral_lb,
        lambda2,
        delta_exact,
        delta_witness,
        diameter: diam.value,
        diameter_exact: diam.exact,
        h_ge_inv_diam,
    })
}

fn mask_to_set(mask: u32) -> Vec<u32> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

struct Exhaustive {
    h: Ratio<u64>,
    h_mask: u32,
    delta: Option<(f64, u32)>,
}

/// Visits every subset in Gray-code order, updating `|S|` and `|dS|` in
/// O(1) per step from neighbor bitmasks.
fn enumerate_subsets(g: &Graph) -> Exhaustive {
    let n = g.n();
    debug_assert!(n <= EXACT_CHEEGER_MAX_N);
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let deg: Vec<i64> = (0..n).map(|v| g.degree(v) as i64).collect();
    let half = n / 2;
    let ln: Vec<f64> = (0..=g.m().max(n)).map(|k| (k as f64).ln()).collect();

    let (mut set, mut size, mut boundary) = (0u32, 0usize, 0i64);
    let (mut best_num, mut best_den, mut best_mask) = (u64::MAX, 1u64, 0u32);
    let mut delta: Option<(f64, u32)> = None;
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        let bit = 1u32 << v;
        let inside = (adj[v] & set & !bit).count_ones() as i64;
        if set & bit == 0 {
            set |= bit;
            size += 1;
            boundary += deg[v] - 2 * inside;
        } else {
            set &= !bit;
            size -= 1;
            boundary -= deg[v] - 2 * inside;
        }
        if size == 0 || size > half {
            continue;
        }
        let b = boundary as u64;
        if (b as u128) * (best_den as u128) < (best_num as u128) * (size as u128) {
            best_num = b;
            best_den = size as u64;
            best_mask = set;
        }
        if size >= 2 {
            let val = ln[b as usize] / ln[size];
            if delta.is_none_or(|(d, _)| val < d) {
                delta = Some((val, set));
            }
        }
    }
    Exhaustive {
        h: Ratio::new(best_num, best_den),
        h_mask: best_mask,
        delta,
    }
}

/// Second-smallest eigenvalue of `I - D^{-1/2} A D^{-1/2}` by power
/// iteration on `I + D^{-1/2} A D^{-1/2}` with the top eigenvector
/// `sqrt(deg)` projected out. `None` if the residual does not reach
/// `EIGEN_TOL` within `EIGEN_MAX_ITER` iterations.
fn normalized_lambda2(g: &Graph) -> Option<f64> {
    let n = g.n();
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let top: Vec<f64> = {
        let s: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        s.into_iter().map(|x| x / norm).collect()
    };
    let apply = |x: &[f64], out: &mut [f64]| {
        for v in 0..n {
            let acc: f64 = g
                .neighbors(v)
                .iter()
                .map(|&u| x[u as usize] * inv_sqrt[u as usize])
                .sum();
            out[v] = x[v] + inv_sqrt[v] * acc;
        }
    };
    let project = |x: &mut [f64]| {
        let c: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(&top).for_each(|(a, b)| *a -= c * b);
    };
    let normalize = |x: &mut [f64]| -> f64 {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        x.iter_mut().for_each(|a| *a /= norm);
        norm
    };

    let mut rng = Seed(0x5eed).stream(0);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    project(&mut x);
    if normalize(&mut x) == 0.0 {
        return None;
    }
    let mut y = vec![0.0; n];
    for _ in 0..EIGEN_MAX_ITER {
        apply(&x, &mut y);
        project(&mut y);
        let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let residual = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - mu * a).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= EIGEN_TOL {
            return Some((2.0 - mu).max(0.0));
        }
        if normalize(&mut y) == 0.0 {
            // x was (numerically) in the kernel of the shifted operator,
            // i.e. every remaining eigenvalue is 2.
            return Some(2.0);
        }
        std::mem::swap(&mut x, &mut y);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;

    /// Direct enumeration without Gray codes.
    fn brute(g: &Graph) -> (Ratio<u64>, f64) {
        let n = g.n();
        let mut h = Ratio::new(u64::MAX, 1);
        let mut delta = f64::INFINITY;
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size > n / 2 {
                continue;
            }
            let b = g
                .edges()
                .iter()
                .filter(|&&(a, c)| (mask >> a & 1) != (mask >> c & 1))
                .count() as u64;
            h = h.min(Ratio::new(b, size as u64));
            if size >= 2 {
                delta = delta.min((b as f64).ln() / (size as f64).ln());
            }
        }
        (h, delta)
    }

    #[test]
    fn cycle8() {
        let r = cheeger_report(&make_cycle(8).unwrap()).unwrap();
        assert_eq!(r.h_exact, Some(Ratio::new(1, 2)));
        let w = r.h_witness.unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(r.diameter, 4);
        assert!(r.h_ge_inv_diam);
        assert!(r.h_spectral_lb.unwrap() <= 0.5);
    }

    #[test]
    fn k4_delta_is_two() {
        let r = cheeger_report(&make_complete(4).unwrap()).unwrap();
        assert!((r.delta_exact.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.delta_witness.unwrap().len(), 2);
        assert_eq!(r.h_exact, Some(Ratio::new(2, 1)));
    }

    #[test]
    fn gray_code_matches_brute_force() {
        let graphs = vec![
            make_cycle(9).unwrap(),
            make_path(7).unwrap(),
            make_hypercube(3).unwrap(),
            make_torus(3, 2).unwrap(),
            make_cycle_matching(12, Seed(5)).unwrap(),
            make_circulant(10, &[1, 4]).unwrap(),
        ];
        for g in graphs {
            let r = cheeger_report(&g).unwrap();
            let (h, d) = brute(&g);
            assert_eq!(r.h_exact, Some(h), "{}", g.family());
            assert!((r.delta_exact.unwrap() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_attains_h_exactly() {
        let g = make_cycle_matching(16, Seed(1)).unwrap();
        let r = cheeger_report(&g).unwrap();
        let w = r.h_witness.clone().unwrap();
        let mask = w.iter().fold(0u32, |m, &v| m | 1 << v);
        let b = g
            .edges()
            .iter()
            .filter(|&&(a, c)| (mask >> a & 1) != (mask >> c & 1))
            .count() as u64;
        assert!(w.len() <= g.n() / 2);
        assert_eq!(Ratio::new(b, w.len() as u64), r.h_exact.unwrap());

        let dw = r.delta_witness.clone().unwrap();
        let dmask = dw.iter().fold(0u32, |m, &v| m | 1 << v);
        let db = g
            .edges()
            .iter()
            .filter(|&&(a, c)| (dmask >> a & 1) != (dmask >> c & 1))
            .count() as f64;
        assert!((db - (dw.len() as f64).powf(r.delta_exact.unwrap())).abs() < 1e-9);
    }

    #[test]
    fn spectral_bound_below_exact() {
        for g in [
            make_cycle(12).unwrap(),
            make_hypercube(4).unwrap(),
            make_complete(6).unwrap(),
            make_path(10).unwrap(),
            make_torus(4, 2).unwrap(),
        ] {
            let r = cheeger_report(&g).unwrap();
            let lb = r.h_spectral_lb.expect("eigensolver converged");
            assert!(
                lb <= r.h_exact_f64().unwrap() + 1e-12,
                "{}: {lb}",
                g.family()
            );
        }
    }

    #[test]
    fn lambda2_known_values() {
        // C_n: 1 - cos(2 pi / n); Q_d: 2/d; K_n: n/(n-1).
        let c = cheeger_report(&make_cycle(10).unwrap())
            .unwrap()
            .lambda2
            .unwrap();
        assert!((c - (1.0 - (std::f64::consts::TAU / 10.0).cos())).abs() < 1e-7);
        let q = cheeger_report(&make_hypercube(5).unwrap())
            .unwrap()
            .lambda2
            .unwrap();
        assert!((q - 0.4).abs() < 1e-7);
        let k = cheeger_report(&make_complete(7).unwrap())
            .unwrap()
            .lambda2
            .unwrap();
        assert!((k - 7.0 / 6.0).abs() < 1e-7);
    }

    #[test]
    fn large_graphs_skip_exact_fields() {
        let r = cheeger_report(&make_torus(6, 2).unwrap()).unwrap();
        assert!(r.h_exact.is_none() && r.delta_exact.is_none());
        assert!(r.h_spectral_lb.is_some());
    }
}
