//! Distances, diameter and the weak-concentration diagnostic.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::{Error, Exec, Result, Seed};

/// Distance marker for vertices a BFS never reached.
pub const UNREACHED: u32 = u32::MAX;

/// BFS distances from `source`; unreachable vertices get [`UNREACHED`].
pub fn bfs_distances(g: &Graph, source: usize) -> Vec<u32> {
    multi_source_bfs(g, &[source])
}

/// BFS from a set of sources at distance zero.
pub fn multi_source_bfs(g: &Graph, sources: &[usize]) -> Vec<u32> {
    bfs_order(g, sources).0
}

/// Distances plus the order in which vertices were reached.
fn bfs_order(g: &Graph, sources: &[usize]) -> (Vec<u32>, Vec<u32>) {
    let mut dist = vec![UNREACHED; g.n()];
    let mut order = Vec::with_capacity(g.n());
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] == UNREACHED {
            dist[s] = 0;
            order.push(s as u32);
            queue.push_back(s as u32);
        }
    }
    while let Some(x) = queue.pop_front() {
        let dx = dist[x as usize];
        for &y in g.neighbors(x as usize) {
            if dist[y as usize] == UNREACHED {
                dist[y as usize] = dx + 1;
                order.push(y);
                queue.push_back(y);
            }
        }
    }
    (dist, order)
}

pub fn is_connected(g: &Graph) -> bool {
    g.n() <= 1 || !bfs_distances(g, 0).contains(&UNREACHED)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiameterMode {
    /// Max eccentricity over all vertices.
    Exact,
    /// Max eccentricity over `sources` random roots; a lower bound.
    Sampled { sources: usize, seed: Seed },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diameter {
    pub value: usize,
    /// `false` when the value is only a sampled lower bound.
    pub exact: bool,
}

fn eccentricity(g: &Graph, v: usize) -> Result<usize> {
    let d = bfs_distances(g, v);
    if d.contains(&UNREACHED) {
        return Err(Error::Disconnected);
    }
    Ok(d.into_iter().max().unwrap_or(0) as usize)
}

pub fn diameter(g: &Graph, mode: DiameterMode) -> Result<Diameter> {
    if g.n() == 0 {
        return Err(Error::InvalidGraph("empty graph".into()));
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    match mode {
        DiameterMode::Exact => {
            let ecc = Exec::default().try_map_range(g.n(), |v| eccentricity(g, v))?;
            Ok(Diameter {
                value: ecc.into_iter().max().unwrap_or(0),
                exact: true,
            })
        }
        DiameterMode::Sampled { sources, seed } => {
            if sources == 0 {
                return Err(Error::param("sources", "need at least one BFS root"));
            }
            let mut rng = seed.stream(0);
            let roots: Vec<usize> = (0..sources).map(|_| rng.random_range(0..g.n())).collect();
            let ecc = Exec::default().try_map_range(roots.len(), |i| eccentricity(g, roots[i]))?;
            Ok(Diameter {
                value: ecc.into_iter().max().unwrap_or(0),
                exact: false,
            })
        }
    }
}

/// `min { d(a, b) : a in A, b in B }`, or `None` if no vertex of `B` is
/// reachable from `A`.
pub fn set_distance(g: &Graph, a: &[usize], b: &[usize]) -> Result<Option<usize>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("set", "vertex sets must be non-empty"));
    }
    if let Some(&v) = a.iter().chain(b).find(|&&v| v >= g.n()) {
        return Err(Error::param("set", format!("vertex {v} out of range")));
    }
    let dist = multi_source_bfs(g, a);
    Ok(b.iter()
        .map(|&v| dist[v])
        .filter(|&d| d != UNREACHED)
        .min()
        .map(|d| d as usize))
}

/// Result of [`concentration_diagnostic`]. This is a heuristic lower bound
/// on `sup d(A, B) / diam` over large set pairs, not the exact supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub fraction: f64,
    pub set_size: usize,
    pub set_distance: usize,
    pub diameter: Diameter,
    pub ratio: f64,
    pub heuristic: bool,
}

/// Graphs up to this size get an exact diameter in the diagnostics.
const EXACT_DIAMETER_MAX_N: usize = 4096;

pub(crate) fn default_diameter(g: &Graph) -> Result<Diameter> {
    if g.n() <= EXACT_DIAMETER_MAX_N {
        diameter(g, DiameterMode::Exact)
    } else {
        diameter(
            g,
            DiameterMode::Sampled {
                sources: 32,
                seed: Seed(0),
            },
        )
    }
}

/// Takes `A` = the `ceil(C n)` vertices nearest to a vertex `u` that is
/// deepest in a BFS from vertex 0, then `B` = the `ceil(C n)` vertices
/// nearest to the vertex farthest from `A`, and reports `d(A, B) / diam`.
pub fn concentration_diagnostic(g: &Graph, fraction: f64) -> Result<ConcentrationReport> {
    if !(fraction > 0.0 && fraction <= 0.5) {
        return Err(Error::param(
            "C",
            format!("fraction must lie in (0, 1/2], got {fraction}"),
        ));
    }
    let diam = default_diameter(g)?;
    let k = ((fraction * g.n() as f64).ceil() as usize).max(1);

    let (d0, order0) = bfs_order(g, &[0]);
    let u = *order0.last().unwrap() as usize;
    debug_assert_eq!(d0[u], *d0.iter().max().unwrap());
    let set_a: Vec<usize> = bfs_order(g, &[u]).1[..k]
        .iter()
        .map(|&v| v as usize)
        .collect();
    let (_, order_a) = bfs_order(g, &set_a);
    let w = *order_a.last().unwrap() as usize;
    let set_b: Vec<usize> = bfs_order(g, &[w]).1[..k]
        .iter()
        .map(|&v| v as usize)
        .collect();
    let dist = set_distance(g, &set_a, &set_b)?.ok_or(Error::Disconnected)?;
    Ok(ConcentrationReport {
        fraction,
        set_size: k,
        set_distance: dist,
        diameter: diam,
        ratio: if diam.value == 0 {
            0.0
        } else {
            dist as f64 / diam.value as f64
        },
        heuristic: true,
    })
}

/// Which growth hypotheses a graph satisfies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryTags {
    pub n: usize,
    pub diameter: Diameter,
    /// `diam / ln n`; the log-diameter hypothesis fixes no constant, so
    /// the ratio is reported as is.
    pub diam_over_log_n: f64,
    /// `diam < n^(1/3)`
    pub below_cube_root: bool,
    /// `diam < n / ln n`
    pub below_n_over_log_n: bool,
    pub transitive_by_construction: bool,
}

impl GeometryTags {
    pub fn of(g: &Graph) -> Result<GeometryTags> {
        let diameter = default_diameter(g)?;
        let n = g.n() as f64;
        let d = diameter.value as f64;
        Ok(GeometryTags {
            n: g.n(),
            diameter,
            diam_over_log_n: if g.n() > 1 { d / n.ln() } else { f64::NAN },
            below_cube_root: d < n.cbrt(),
            below_n_over_log_n: g.n() > 1 && d < n / n.ln(),
            transitive_by_construction: g.family().is_transitive(),
        })
    }
}
