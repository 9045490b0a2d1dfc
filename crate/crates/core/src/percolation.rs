//! Bond percolation sampler.
//!
//! Three views of the same random subgraph:
//!
//! * [`percolate_once`]: keep each edge independently with probability `p`
//!   (one uniform per edge, in edge-list order) and report cluster sizes;
//! * [`exact_cluster_law`]: the exact law on small graphs by summing over
//!   all `2^m` edge subsets;
//! * [`sweep_sample`]: insert edges in uniformly random order and record,
//!   for each target fraction `alpha`, the coupling value `T_alpha` at which
//!   the largest cluster first reaches the target. Under the Beta mapping,
//!   `P(T_alpha <= p)` equals the probability at `p` that some cluster has
//!   the target size, for every `p` at once.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::union_find::UnionFind;
use crate::{Error, Exec, Graph, Result, Seed};

/// Largest edge count [`exact_cluster_law`] will enumerate.
pub const EXACT_MAX_EDGES: usize = 25;

/// Cluster size that counts as "a component of size at least `alpha * n`":
/// `ceil(alpha * n)` (with a little slack for float noise such as
/// `2/3 * 3`), and never less than 2, so an event always needs at least one
/// open edge.
pub fn size_target(alpha: f64, n: usize) -> usize {
    let t = alpha * n as f64;
    let r = t.round();
    let c = if (t - r).abs() <= 1e-9 * t.abs().max(1.0) {
        r
    } else {
        t.ceil()
    };
    (c.max(0.0) as usize).max(2)
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in [0, 1], got {p}")))
    }
}

pub(crate) fn check_fraction(name: &'static str, a: f64) -> Result<()> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("fraction must lie in (0, 1], got {a}"),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub largest: usize,
    /// Second-largest cluster, 0 if there is only one.
    pub second: usize,
    pub num_components: usize,
    /// For each requested fraction `c`, the number of clusters of size at
    /// least [`size_target`]`(c, n)`.
    pub counts_at_least: Vec<usize>,
    pub open_edges: usize,
}

impl ClusterStats {
    fn from_union_find(uf: &UnionFind, n: usize, thresholds: &[f64], open_edges: usize) -> Self {
        let sizes = uf.component_sizes();
        let (largest, second) = uf.two_largest();
        let counts_at_least = thresholds
            .iter()
            .map(|&c| {
                let t = size_target(c, n);
                sizes.iter().filter(|&&s| s as usize >= t).count()
            })
            .collect();
        ClusterStats {
            largest: largest as usize,
            second: second as usize,
            num_components: uf.num_components(),
            counts_at_least,
            open_edges,
        }
    }
}

/// Keeps each edge with probability `p`, drawing one uniform per edge in
/// edge-list order, and returns the resulting clusters.
pub fn open_clusters<R: Rng + ?Sized>(g: &Graph, p: f64, rng: &mut R) -> (UnionFind, usize) {
    let mut uf = UnionFind::new(g.n());
    let mut open = 0;
    for &(a, b) in g.edges() {
        if rng.random::<f64>() < p {
            open += 1;
            uf.union(a, b);
        }
    }
    (uf, open)
}

pub fn percolate_with<R: Rng + ?Sized>(
    g: &Graph,
    p: f64,
    rng: &mut R,
    thresholds: &[f64],
) -> ClusterStats {
    let (uf, open) = open_clusters(g, p, rng);
    ClusterStats::from_union_find(&uf, g.n(), thresholds, open)
}

/// One percolation sample from stream 0 of `seed`.
pub fn percolate_once(g: &Graph, p: f64, seed: Seed, thresholds: &[f64]) -> Result<ClusterStats> {
    check_probability("p", p)?;
    for &c in thresholds {
        check_fraction("threshold", c)?;
    }
    Ok(percolate_with(g, p, &mut seed.stream(0), thresholds))
}

/// `n_samples` independent samples; sample `i` uses stream `i` of `seed`.
pub fn cluster_ensemble(
    g: &Graph,
    p: f64,
    thresholds: &[f64],
    n_samples: usize,
    seed: Seed,
    exec: Exec,
) -> Result<Vec<ClusterStats>> {
    check_probability("p", p)?;
    for &c in thresholds {
        check_fraction("threshold", c)?;
    }
    Ok(exec.map_range(n_samples, |i| {
        percolate_with(g, p, &mut seed.stream(i as u64), thresholds)
    }))
}

/// Exact cluster law at a single `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactLaw {
    pub p: f64,
    pub thresholds: Vec<f64>,
    pub expected_largest: f64,
    /// `P(some cluster has size >= size_target(c, n))` per threshold.
    pub prob_at_least: Vec<f64>,
    /// `P(exactly one cluster has size >= size_target(c, n))` per threshold.
    pub prob_unique: Vec<f64>,
}

pub fn exact_cluster_law(g: &Graph, p: f64, thresholds: &[f64]) -> Result<ExactLaw> {
    check_probability("p", p)?;
    for &c in thresholds {
        check_fraction("threshold", c)?;
    }
    let m = g.m();
    if m > EXACT_MAX_EDGES {
        return Err(Error::TooManyEdges {
            edges: m,
            limit: EXACT_MAX_EDGES,
        });
    }
    let n = g.n();
    let targets: Vec<usize> = thresholds.iter().map(|&c| size_target(c, n)).collect();
    let weight: Vec<f64> = (0..=m)
        .map(|k| p.powi(k as i32) * (1.0 - p).powi((m - k) as i32))
        .collect();
    let edges = g.edges();

    // Split the 2^m subsets into chunks by their top bits; partial sums are
    // added in chunk order so the result does not depend on scheduling.
    let chunk_bits = m.min(6);
    let low_bits = m - chunk_bits;
    let partials = Exec::default().map_range(1 << chunk_bits, |hi| {
        let mut acc = vec![0.0f64; 1 + 2 * targets.len()];
        let mut parent: Vec<u32> = Vec::with_capacity(n);
        let mut size: Vec<u32> = Vec::with_capacity(n);
        for lo in 0u64..(1u64 << low_bits) {
            let mask = ((hi as u64) << low_bits) | lo;
            parent.clear();
            parent.extend(0..n as u32);
            size.clear();
            size.resize(n, 1);
            for (e, &(a, b)) in edges.iter().enumerate() {
                if mask >> e & 1 == 1 {
                    let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                    if ra != rb {
                        let (big, small) = if size[ra as usize] >= size[rb as usize] {
                            (ra, rb)
                        } else {
                            (rb, ra)
                        };
                        parent[small as usize] = big;
                        size[big as usize] += size[small as usize];
                    }
                }
            }
            let w = weight[mask.count_ones() as usize];
            let mut largest = 0;
            let mut counts = vec![0usize; targets.len()];
            for v in 0..n {
                if parent[v] as usize == v {
                    let s = size[v] as usize;
                    largest = largest.max(s);
                    for (c, &t) in counts.iter_mut().zip(&targets) {
                        if s >= t {
                            *c += 1;
                        }
                    }
                }
            }
            acc[0] += w * largest as f64;
            for (i, &c) in counts.iter().enumerate() {
                if c >= 1 {
                    acc[1 + i] += w;
                }
                if c == 1 {
                    acc[1 + targets.len() + i] += w;
                }
            }
        }
        acc
    });
    let mut total = vec![0.0f64; 1 + 2 * targets.len()];
    for part in partials {
        for (t, x) in total.iter_mut().zip(part) {
            *t += x;
        }
    }
    let k = targets.len();
    Ok(ExactLaw {
        p,
        thresholds: thresholds.to_vec(),
        expected_largest: total[0],
        prob_at_least: total[1..1 + k].iter().map(|x| x.clamp(0.0, 1.0)).collect(),
        prob_unique: total[1 + k..].iter().map(|x| x.clamp(0.0, 1.0)).collect(),
    })
}

fn root(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let gp = parent[parent[x as usize] as usize];
        parent[x as usize] = gp;
        x = gp;
    }
    x
}

/// How an insertion rank `k` (out of `m` edges) becomes a coupling value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMapping {
    /// `k / (m + 1)`, the mean of the `k`-th uniform order statistic.
    Expected,
    /// The `k`-th order statistic of `m` uniforms itself, drawn jointly
    /// with the insertion order. Exact in distribution.
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub p: f64,
    pub largest: usize,
    pub second: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingSample {
    pub alphas: Vec<f64>,
    /// `T_alpha` per requested alpha; 1 where the target was never reached.
    pub crossings: Vec<f64>,
    /// Insertion rank (1-based) of the crossing, `None` if never crossed.
    pub ranks: Vec<Option<usize>>,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl CrossingSample {
    pub fn never_crossed(&self, i: usize) -> bool {
        self.ranks[i].is_none()
    }
}

/// One sweep with the `k/(m+1)` mapping from stream 0 of `seed`. `grid` is
/// the trajectory resolution: points at `p = j/grid`, `j = 0..=grid`
/// (0 for no trajectory).
pub fn sweep_sample(g: &Graph, alphas: &[f64], seed: Seed, grid: usize) -> Result<CrossingSample> {
    for &a in alphas {
        check_fraction("alpha", a)?;
    }
    Ok(sweep_with(
        g,
        alphas,
        RankMapping::Expected,
        grid,
        &mut seed.stream(0),
    ))
}

/// Sweep `n_samples` times; sample `i` uses stream `i` of `seed`.
pub fn sweep_ensemble(
    g: &Graph,
    alphas: &[f64],
    mapping: RankMapping,
    n_samples: usize,
    seed: Seed,
    exec: Exec,
) -> Result<Vec<CrossingSample>> {
    for &a in alphas {
        check_fraction("alpha", a)?;
    }
    Ok(exec.map_range(n_samples, |i| {
        sweep_with(g, alphas, mapping, 0, &mut seed.stream(i as u64))
    }))
}

pub fn sweep_with<R: Rng + ?Sized>(
    g: &Graph,
    alphas: &[f64],
    mapping: RankMapping,
    grid: usize,
    rng: &mut R,
) -> CrossingSample {
    let (n, m) = (g.n(), g.m());
    let edges = g.edges();
    let targets: Vec<usize> = alphas.iter().map(|&a| size_target(a, n)).collect();
    let mut pending: Vec<usize> = (0..alphas.len()).collect();
    pending.sort_by_key(|&i| std::cmp::Reverse(targets[i]));

    let checkpoints: Vec<(f64, usize)> = if grid == 0 {
        Vec::new()
    } else {
        (0..=grid)
            .map(|j| {
                let p = j as f64 / grid as f64;
                (p, ((p * (m + 1) as f64).floor() as usize).min(m))
            })
            .collect()
    };
    let mut trajectory = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0;

    let mut uf = UnionFind::new(n);
    let mut largest = if n > 0 { 1 } else { 0 };
    let mut ranks = vec![None; alphas.len()];
    let mut order: Vec<u32> = (0..m as u32).collect();
    let mut spacing_sum = 0.0f64;
    let mut spacing_at: Vec<f64> = vec![0.0; alphas.len()];
    let mut inserted = 0;

    let record = |uf: &UnionFind, p: f64, out: &mut Vec<TrajectoryPoint>| {
        let (a, b) = uf.two_largest();
        out.push(TrajectoryPoint {
            p,
            largest: a as usize,
            second: b as usize,
        });
    };
    while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint].1 == 0 {
        record(&uf, checkpoints[next_checkpoint].0, &mut trajectory);
        next_checkpoint += 1;
    }

    while inserted < m && (!pending.is_empty() || next_checkpoint < checkpoints.len()) {
        let j = rng.random_range(inserted..m);
        order.swap(inserted, j);
        let (a, b) = edges[order[inserted] as usize];
        inserted += 1;
        if mapping == RankMapping::Beta {
            let e: f64 = Exp1.sample(rng);
            spacing_sum += e;
        }
        if let Some(s) = uf.union(a, b) {
            largest = largest.max(s as usize);
        }
        while let Some(&i) = pending.last() {
            if targets[i] > largest {
                break;
            }
            ranks[i] = Some(inserted);
            spacing_at[i] = spacing_sum;
            pending.pop();
        }
        while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint].1 == inserted {
            record(&uf, checkpoints[next_checkpoint].0, &mut trajectory);
            next_checkpoint += 1;
        }
    }

    let crossings = match mapping {
        RankMapping::Expected => ranks
            .iter()
            .map(|r| r.map_or(1.0, |k| k as f64 / (m + 1) as f64))
            .collect(),
        RankMapping::Beta => {
            // U_(k) = S_k / S_{m+1} for partial sums S of m+1 standard
            // exponentials; the unseen tail sum is one Gamma draw.
            let rest = (m + 1 - inserted) as f64;
            let tail = Gamma::new(rest, 1.0).expect("positive shape").sample(rng);
            let total = spacing_sum + tail;
            ranks
                .iter()
                .zip(&spacing_at)
                .map(|(r, &s)| if r.is_some() { s / total } else { 1.0 })
                .collect()
        }
    };
    CrossingSample {
        alphas: alphas.to_vec(),
        crossings,
        ranks,
        trajectory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use crate::graph::{bfs_distances, Family};

    #[test]
    fn size_target_rounding() {
        assert_eq!(size_target(2.0 / 3.0, 3), 2);
        assert_eq!(size_target(0.5, 4), 2);
        assert_eq!(size_target(0.5, 5), 3);
        assert_eq!(size_target(0.75, 4), 3);
        assert_eq!(size_target(1.0, 7), 7);
        assert_eq!(size_target(0.01, 10), 2);
        assert_eq!(size_target(0.1, 10), 2);
        assert_eq!(size_target(0.3, 10), 3);
    }

    #[test]
    fn extremes_of_p() {
        let g = make_torus(5, 2).unwrap();
        let s0 = percolate_once(&g, 0.0, Seed(1), &[0.5]).unwrap();
        assert_eq!(
            (s0.largest, s0.second, s0.num_components, s0.open_edges),
            (1, 1, 25, 0)
        );
        assert_eq!(s0.counts_at_least, vec![0]);
        let s1 = percolate_once(&g, 1.0, Seed(1), &[0.5, 1.0]).unwrap();
        assert_eq!(
            (s1.largest, s1.second, s1.num_components, s1.open_edges),
            (25, 0, 1, 50)
        );
        assert_eq!(s1.counts_at_least, vec![1, 1]);
        assert!(percolate_once(&g, 1.5, Seed(1), &[]).is_err());
    }

    #[test]
    fn reproducible() {
        let g = make_hypercube(6).unwrap();
        let a = percolate_once(&g, 0.3, Seed(99), &[0.1]).unwrap();
        let b = percolate_once(&g, 0.3, Seed(99), &[0.1]).unwrap();
        assert_eq!(a, b);
        let e1 = cluster_ensemble(&g, 0.3, &[0.1], 50, Seed(5), Exec::Parallel).unwrap();
        let e2 = cluster_ensemble(&g, 0.3, &[0.1], 50, Seed(5), Exec::Sequential).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn stats_invariants() {
        let g = make_cycle_matching(200, Seed(3)).unwrap();
        for s in 0..50 {
            let st = percolate_once(&g, 0.45, Seed(s), &[0.01, 0.05, 0.2]).unwrap();
            assert!(st.largest >= st.second);
            assert!(st.counts_at_least.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    /// Components by BFS over the open subgraph.
    fn bfs_labels(g: &Graph, open: &[bool]) -> Vec<usize> {
        let kept: Vec<(u32, u32)> = g
            .edges()
            .iter()
            .zip(open)
            .filter(|(_, &o)| o)
            .map(|(e, _)| *e)
            .collect();
        let h = Graph::from_edges(
            g.n(),
            &kept,
            Family::Custom {
                name: "open".into(),
            },
        )
        .unwrap();
        let mut label = vec![usize::MAX; g.n()];
        for v in 0..g.n() {
            if label[v] == usize::MAX {
                let d = bfs_distances(&h, v);
                for (u, &du) in d.iter().enumerate() {
                    if du != crate::graph::UNREACHED {
                        label[u] = v;
                    }
                }
            }
        }
        label
    }

    #[test]
    fn union_find_partition_matches_bfs() {
        let graphs = [
            make_torus(6, 2).unwrap(),
            make_random_regular(60, 3, Seed(2)).unwrap(),
            make_hypercube(5).unwrap(),
            make_path(30).unwrap(),
        ];
        for trial in 0..1000u64 {
            let g = &graphs[trial as usize % graphs.len()];
            let p = (trial % 17) as f64 / 16.0;
            let mut rng = Seed(trial).stream(0);
            let open: Vec<bool> = (0..g.m()).map(|_| rng.random::<f64>() < p).collect();
            let mut uf = open_clusters(g, p, &mut Seed(trial).stream(0)).0;
            let labels = bfs_labels(g, &open);
            for &(a, b) in g.edges().iter().step_by(3) {
                assert_eq!(uf.same(a, b), labels[a as usize] == labels[b as usize]);
            }
            for v in 0..g.n() {
                assert_eq!(uf.same(v as u32, 0), labels[v] == labels[0]);
            }
        }
    }

    #[test]
    fn exact_law_closed_forms() {
        let c4 = make_cycle(4).unwrap();
        let p = 1.0 - 2f64.powf(-0.25);
        let law = exact_cluster_law(&c4, p, &[0.5]).unwrap();
        assert!((law.prob_at_least[0] - 0.5).abs() < 1e-12);
        let law0 = exact_cluster_law(&c4, 0.0, &[0.5]).unwrap();
        assert_eq!(law0.prob_at_least[0], 0.0);
        assert_eq!(law0.expected_largest, 1.0);

        // K_3 at 1/2: 1 empty subset (largest 1), 3 single edges (2), 4
        // with two or three edges (3). E = 19/8. Unique cluster >= 2 iff
        // at least one edge is open: 7/8.
        let k3 = make_cycle(3).unwrap();
        let law = exact_cluster_law(&k3, 0.5, &[0.6]).unwrap();
        assert!((law.expected_largest - 19.0 / 8.0).abs() < 1e-15);
        assert!((law.prob_unique[0] - 7.0 / 8.0).abs() < 1e-15);
        assert!(exact_cluster_law(&make_torus(4, 2).unwrap(), 0.5, &[]).is_err());
    }

    #[test]
    fn sweep_on_triangle_is_deterministic() {
        let k3 = make_cycle(3).unwrap();
        for s in 0..20 {
            let cs = sweep_sample(&k3, &[2.0 / 3.0, 1.0], Seed(s), 0).unwrap();
            assert_eq!(cs.crossings[0], 0.25);
            assert_eq!(cs.ranks[1], Some(2));
        }
    }

    #[test]
    fn sweep_small_alpha_and_full_connection() {
        let g = make_torus(5, 2).unwrap();
        let n = g.n() as f64;
        for s in 0..20 {
            let cs = sweep_sample(&g, &[1.0 / n, 1.0], Seed(s), 0).unwrap();
            assert_eq!(cs.crossings[0], 1.0 / (g.m() + 1) as f64);
            assert!(cs.ranks[1].unwrap() >= g.n() - 1);
            assert!(cs.crossings[1] < 1.0);
        }
    }

    #[test]
    fn sweep_monotone_in_alpha_and_trajectory() {
        let g = make_cycle_matching(300, Seed(8)).unwrap();
        let alphas = [0.9, 0.05, 0.5, 0.2];
        for mapping in [RankMapping::Expected, RankMapping::Beta] {
            for s in 0..30 {
                let cs = sweep_with(&g, &alphas, mapping, 50, &mut Seed(s).stream(0));
                let mut idx: Vec<usize> = (0..4).collect();
                idx.sort_by(|&a, &b| alphas[a].partial_cmp(&alphas[b]).unwrap());
                for w in idx.windows(2) {
                    assert!(cs.crossings[w[0]] <= cs.crossings[w[1]]);
                }
                assert!(cs.crossings.iter().all(|&t| t > 0.0 && t < 1.0));
                assert_eq!(cs.trajectory.len(), 51);
                assert!(cs
                    .trajectory
                    .windows(2)
                    .all(|w| w[0].largest <= w[1].largest));
                assert_eq!(cs.trajectory[0].largest, 1);
                assert_eq!(cs.trajectory[50].largest, 300);
                for t in &cs.trajectory {
                    assert!(t.largest >= t.second);
                }
            }
        }
    }

    #[test]
    fn never_crossed_on_disconnected() {
        let g = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (3, 4)],
            Family::Custom { name: "x".into() },
        )
        .unwrap();
        let cs = sweep_sample(&g, &[0.5, 0.9], Seed(1), 0).unwrap();
        assert!(!cs.never_crossed(0));
        assert!(cs.never_crossed(1));
        assert_eq!(cs.crossings[1], 1.0);
    }
}
