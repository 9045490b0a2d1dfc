//! Calculators for the disjoint-path argument behind the giant-component
//! uniqueness result, and an end-to-end check of the two-point connection
//! bound `P(u <-> v) >= (C q / 2)^(6 / (q C))` on Cayley graphs.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::families::make_cayley;
use crate::graph::GroupSpec;
use crate::percolation::{check_fraction, check_probability, open_clusters, size_target};
use crate::stats::Proportion;
use crate::{Error, Exec, Result, Seed};

const PAIR_TAG: u64 = 0x9a1e;

/// `|A| / (2 l K^l)`, exactly.
pub fn thm1_disjoint_path_bound(a_size: u64, l: u32, k: u64) -> Result<BigRational> {
    if a_size == 0 {
        return Err(Error::param("A_size", "must be at least 1"));
    }
    if l == 0 {
        return Err(Error::param("l", "must be at least 1"));
    }
    if k == 0 {
        return Err(Error::param("K", "must be at least 1"));
    }
    let denom = BigUint::from(2u32) * BigUint::from(l) * BigUint::from(k).pow(l);
    Ok(BigRational::new(BigUint::from(a_size).into(), denom.into()))
}

/// A probability kept as its natural logarithm so that values far below
/// the smallest `f64` stay representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProb {
    pub ln: f64,
}

impl LogProb {
    /// As an `f64`; underflows to 0 below about `1e-308`.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn log10(self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// `(mantissa, exponent)` with `value = mantissa * 10^exponent`.
    pub fn scientific(self) -> (f64, i64) {
        if self.ln == f64::NEG_INFINITY {
            return (0.0, 0);
        }
        let l = self.log10();
        let e = l.floor();
        (10f64.powf(l - e), e as i64)
    }
}

/// `(1 - eps^l)^n_paths`, evaluated as `exp(n_paths * log1p(-eps^l))`.
pub fn thm1_failure_bound(n_paths: f64, eps: f64, l: u32) -> Result<LogProb> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(
            "eps",
            format!("must lie in (0, 1), got {eps}"),
        ));
    }
    if !n_paths.is_finite() || n_paths < 0.0 {
        return Err(Error::param(
            "n_paths",
            format!("must be finite and non-negative, got {n_paths}"),
        ));
    }
    if l == 0 {
        return Err(Error::param("l", "must be at least 1"));
    }
    if n_paths == 0.0 {
        return Ok(LogProb { ln: 0.0 });
    }
    let open = eps.powi(l as i32);
    Ok(LogProb {
        ln: n_paths * (-open).ln_1p(),
    })
}

/// Both calculators for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm1Bound {
    pub a_size: u64,
    pub l: u32,
    pub k: u64,
    pub eps: f64,
    #[serde(with = "rational_string")]
    pub n_paths_lb: BigRational,
    pub n_paths_lb_f64: f64,
    pub failure_ub: LogProb,
}

impl Thm1Bound {
    pub fn compute(a_size: u64, l: u32, k: u64, eps: f64) -> Result<Thm1Bound> {
        let n_paths_lb = thm1_disjoint_path_bound(a_size, l, k)?;
        let n_paths_lb_f64 = n_paths_lb.to_f64().unwrap_or(0.0);
        let failure_ub = thm1_failure_bound(n_paths_lb_f64, eps, l)?;
        Ok(Thm1Bound {
            a_size,
            l,
            k,
            eps,
            n_paths_lb,
            n_paths_lb_f64,
            failure_ub,
        })
    }
}

mod rational_string {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in (0, 1], got {x}")))
    }
}

/// `ln((C q / 2)^(6 / (q C)))`.
pub fn prop1_bound_ln(q: f64, c: f64) -> Result<f64> {
    check_unit("q", q)?;
    check_unit("C", c)?;
    Ok(6.0 / (q * c) * (c * q / 2.0).ln())
}

/// `(C q / 2)^(6 / (q C))`.
pub fn prop1_bound(q: f64, c: f64) -> Result<f64> {
    prop1_bound_ln(q, c).map(f64::exp)
}

/// Word-length bound from the counting step, with additive slack 3 for
/// the rounding of the word length to a multiple of three.
pub fn counting_diameter_bound(order: usize, s_size: usize) -> f64 {
    3.0 * order as f64 / s_size as f64 + 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Report {
    pub group: GroupSpec,
    pub order: usize,
    pub p: f64,
    pub c: f64,
    pub n_samples: usize,
    /// `P(identity lies in a cluster of size >= C n)`.
    pub q_hat: f64,
    pub q_stderr: f64,
    /// `q_hat - 3 stderr`, floored just above zero.
    pub q_lo: f64,
    pub vacuous: bool,
    /// Estimated `P(u <-> identity)` for every element `u`.
    pub conn_hat: Vec<f64>,
    /// Non-identity elements with estimated connection probability at least
    /// `q_hat C / 2`.
    pub s: Vec<usize>,
    pub s_size: usize,
    /// Elements within 3 standard errors of the cut.
    pub borderline: Vec<usize>,
    /// `|S| + 1 >= q_hat C n / 2` (the identity counted).
    pub expected_count_consistent: bool,
    pub s_symmetric: bool,
    pub s_generating: bool,
    pub diam_s: Option<usize>,
    /// `6 / (q_hat C)`
    pub word_bound: f64,
    /// `6 / (q_lo C) + 3`, the bound actually checked.
    pub word_bound_slack: f64,
    /// `(C q_hat / 2)^(6 / (q_hat C))`
    pub rhs: f64,
    /// Same bound at `q_lo`, compared against the pair minimum.
    pub rhs_lo: f64,
    pub pairs: Vec<(usize, usize)>,
    pub min_pair_conn_hat: f64,
    pub min_pair_stderr: f64,
    pub pass: bool,
}

/// Monte Carlo check of the two-point bound on a Cayley graph, with the
/// identity standing in for the base vertex.
pub fn prop1_verify(
    spec: &GroupSpec,
    p: f64,
    c: f64,
    n_samples: usize,
    pair_samples: usize,
    seed: Seed,
) -> Result<Prop1Report> {
    check_probability("p", p)?;
    check_fraction("C", c)?;
    if n_samples == 0 {
        return Err(Error::param("n_samples", "need at least one sample"));
    }
    let g = make_cayley(spec)?;
    let group = spec.group;
    let n = g.n();
    let target = size_target(c, n);

    let mut pair_rng = seed.derive(PAIR_TAG).stream(0);
    let pairs: Vec<(usize, usize)> = (0..pair_samples)
        .map(|_| {
            let a = pair_rng.random_range(0..n);
            let mut b = pair_rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        })
        .collect();

    // Integer counts per chunk of samples, summed in chunk order.
    let chunks = n_samples.div_ceil(256);
    let partial = Exec::default().map_range(chunks, |ch| {
        let mut big = 0usize;
        let mut conn = vec![0usize; n];
        let mut pair_hits = vec![0usize; pairs.len()];
        for i in ch * 256..((ch + 1) * 256).min(n_samples) {
            let (mut uf, _) = open_clusters(&g, p, &mut seed.stream(i as u64));
            let root = uf.find(0);
            if uf.size_of(0) as usize >= target {
                big += 1;
            }
            for (u, cnt) in conn.iter_mut().enumerate() {
                if uf.find(u as u32) == root {
                    *cnt += 1;
                }
            }
            for (hit, &(a, b)) in pair_hits.iter_mut().zip(&pairs) {
                if uf.same(a as u32, b as u32) {
                    *hit += 1;
                }
            }
        }
        (big, conn, pair_hits)
    });
    let mut big = 0;
    let mut conn_count = vec![0usize; n];
    let mut pair_count = vec![0usize; pairs.len()];
    for (b, cn, ph) in partial {
        big += b;
        conn_count.iter_mut().zip(cn).for_each(|(x, y)| *x += y);
        pair_count.iter_mut().zip(ph).for_each(|(x, y)| *x += y);
    }

    let nf = n_samples as f64;
    let q = Proportion::wilson(big, n_samples, 0.95);
    let q_hat = q.estimate;
    let q_stderr = q.stderr();
    let q_lo = (q_hat - 3.0 * q_stderr).max(1.0 / nf);
    let conn_hat: Vec<f64> = conn_count.iter().map(|&k| k as f64 / nf).collect();
    let cut = q_hat * c / 2.0;
    let s: Vec<usize> = (1..n)
        .filter(|&u| q_hat > 0.0 && conn_hat[u] >= cut)
        .collect();
    let borderline: Vec<usize> = (1..n)
        .filter(|&u| {
            let se = (conn_hat[u] * (1.0 - conn_hat[u]) / nf)
                .sqrt()
                .max(1.0 / nf);
            (conn_hat[u] - cut).abs() <= 3.0 * se
        })
        .collect();
    let s_symmetric = s
        .iter()
        .all(|&u| s.binary_search(&group.inverse(u)).is_ok());
    let diam_s = if s.is_empty() {
        None
    } else {
        group.cayley_diameter(&s)
    };
    let s_generating = diam_s.is_some();

    let (min_pair_conn_hat, min_pair_stderr) = pair_count
        .iter()
        .map(|&k| {
            let ph = k as f64 / nf;
            (ph, (ph * (1.0 - ph) / nf).sqrt())
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::NAN, f64::NAN));

    let vacuous = big == 0;
    let (word_bound, word_bound_slack, rhs, rhs_lo) = if vacuous {
        (f64::INFINITY, f64::INFINITY, 0.0, 0.0)
    } else {
        (
            6.0 / (q_hat * c),
            6.0 / (q_lo * c) + 3.0,
            prop1_bound(q_hat, c)?,
            prop1_bound(q_lo, c)?,
        )
    };
    let diam_ok = diam_s.is_some_and(|d| d as f64 <= word_bound_slack);
    let pairs_ok = pairs.is_empty() || rhs_lo <= min_pair_conn_hat + 3.0 * min_pair_stderr;
    let pass = !vacuous && s_symmetric && s_generating && diam_ok && pairs_ok;

    Ok(Prop1Report {
        group: spec.clone(),
        order: n,
        p,
        c,
        n_samples,
        q_hat,
        q_stderr,
        q_lo,
        vacuous,
        s_size: s.len(),
        expected_count_consistent: (s.len() + 1) as f64 >= q_hat * c * n as f64 / 2.0,
        conn_hat,
        s,
        borderline,
        s_symmetric,
        s_generating,
        diam_s,
        word_bound,
        word_bound_slack,
        rhs,
        rhs_lo,
        pairs,
        min_pair_conn_hat,
        min_pair_stderr,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Group;
    use num_bigint::BigInt;

    #[test]
    fn disjoint_path_examples() {
        assert_eq!(
            thm1_disjoint_path_bound(1024, 2, 4).unwrap(),
            BigRational::from_integer(16.into())
        );
        assert_eq!(
            thm1_disjoint_path_bound(77, 1, 1).unwrap(),
            BigRational::new(BigInt::from(77), BigInt::from(2))
        );
        // 10^6 / (20 * 3^10): gcd 20, giving 50000 / 59049.
        assert_eq!(
            thm1_disjoint_path_bound(1_000_000, 10, 3).unwrap(),
            BigRational::new(BigInt::from(50_000), BigInt::from(59_049))
        );
        assert!(thm1_disjoint_path_bound(0, 1, 1).is_err());
    }

    #[test]
    fn disjoint_path_needs_big_integers() {
        // 7^40 overflows u64 (and u128 after the factor 80).
        let r = thm1_disjoint_path_bound(u64::MAX, 40, 7).unwrap();
        let mut denom = BigInt::from(80);
        for _ in 0..40 {
            denom *= 7;
        }
        assert_eq!(
            r * BigRational::from_integer(denom),
            BigRational::from_integer(BigInt::from(u64::MAX))
        );
    }

    #[test]
    fn failure_bound_examples() {
        let v = thm1_failure_bound(16.0, 0.5, 2).unwrap().value();
        assert!((v - 0.75f64.powi(16)).abs() < 1e-15);
        assert!((v - 0.010023).abs() < 1e-6);
        assert_eq!(thm1_failure_bound(0.0, 0.3, 4).unwrap().value(), 1.0);
        let tiny = thm1_failure_bound(1e9, 0.1, 6).unwrap();
        assert!((tiny.ln + 1000.0005).abs() < 1e-3);
        let (mant, exp) = tiny.scientific();
        assert_eq!(exp, -435);
        assert!((1.0..10.0).contains(&mant));
        assert!(thm1_failure_bound(1.0, 1.0, 1).is_err());
    }

    #[test]
    fn failure_bound_monotonicity() {
        let mut prev = 1.0;
        for a in [10u64, 100, 1000, 10_000] {
            let b = Thm1Bound::compute(a, 2, 3, 0.5).unwrap().failure_ub.ln;
            assert!(b < prev);
            prev = b;
        }
        // Increasing in l for fixed others.
        let ls: Vec<f64> = (1..6)
            .map(|l| Thm1Bound::compute(5000, l, 3, 0.5).unwrap().failure_ub.ln)
            .collect();
        assert!(ls.windows(2).all(|w| w[0] < w[1]), "{ls:?}");
    }

    #[test]
    fn prop1_bound_examples() {
        assert!((prop1_bound(1.0, 1.0).unwrap() - 0.015625).abs() < 1e-15);
        let v = prop1_bound(0.5, 1.0).unwrap();
        assert!((v - 0.25f64.powi(12)).abs() < 1e-20);
        assert!((v - 5.96e-8).abs() < 1e-10);
        let grid: Vec<f64> = (1..=10)
            .map(|i| prop1_bound(i as f64 / 10.0, 0.5).unwrap())
            .collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(prop1_bound(0.0, 0.5).is_err());
    }

    #[test]
    fn complete_graph_everything_connected() {
        let spec = GroupSpec::all_nonidentity(Group::Cyclic { m: 6 }).unwrap();
        let r = prop1_verify(&spec, 1.0, 1.0, 1000, 20, Seed(1)).unwrap();
        assert_eq!(r.q_hat, 1.0);
        assert_eq!(r.s, vec![1, 2, 3, 4, 5]);
        assert_eq!(r.diam_s, Some(1));
        assert_eq!(r.word_bound, 6.0);
        assert_eq!(r.min_pair_conn_hat, 1.0);
        assert!(r.rhs >= 1.0 / 64.0 - 1e-15);
        assert!(r.pass);
    }

    #[test]
    fn vacuous_when_p_zero() {
        let spec = GroupSpec::standard(Group::Cyclic { m: 10 }).unwrap();
        let r = prop1_verify(&spec, 0.0, 0.5, 1000, 10, Seed(1)).unwrap();
        assert!(r.vacuous && !r.pass);
    }

    #[test]
    fn counting_bound_on_exact_generating_sets() {
        for group in [
            Group::Cyclic { m: 15 },
            Group::Symmetric { m: 4 },
            Group::Dihedral { m: 6 },
        ] {
            let full = GroupSpec::all_nonidentity(group).unwrap();
            let d = group.cayley_diameter(&full.generators).unwrap();
            assert!(d as f64 <= counting_diameter_bound(group.order(), full.generators.len()));
            let std = GroupSpec::standard(group).unwrap();
            let d = group.cayley_diameter(&std.generators).unwrap();
            assert!(d as f64 <= counting_diameter_bound(group.order(), std.generators.len()));
        }
    }
}
