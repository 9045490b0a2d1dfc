//! Finite simple graphs in CSR form, the families they are built from, and
//! their deterministic geometry.

mod cheeger;
pub mod families;
mod geometry;
pub mod group;
mod io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use cheeger::{cheeger_report, CheegerReport, EXACT_CHEEGER_MAX_N};
pub use geometry::{
    bfs_distances, concentration_diagnostic, diameter, is_connected, multi_source_bfs,
    set_distance, ConcentrationReport, Diameter, DiameterMode, GeometryTags, UNREACHED,
};
pub use group::{Group, GroupSpec};
pub use io::{read_graph, write_graph};

/// Largest vertex count any generator will build.
pub const DEFAULT_VERTEX_BUDGET: usize = 1 << 24;

/// What a graph is, with the parameters needed to rebuild it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Torus {
        side: usize,
        dim: usize,
    },
    Hypercube {
        dim: usize,
    },
    CycleMatching {
        n: usize,
        seed: u64,
    },
    RandomRegular {
        n: usize,
        k: usize,
        seed: u64,
    },
    ProductCycle {
        base: Box<Family>,
        k: usize,
    },
    Cayley {
        spec: GroupSpec,
    },
    /// Anything not built by a generator, including graphs read from files
    /// whose declared family could not be confirmed.
    Custom {
        name: String,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Torus { .. } => "torus",
            Family::Hypercube { .. } => "hypercube",
            Family::CycleMatching { .. } => "cycle_matching",
            Family::RandomRegular { .. } => "random_regular",
            Family::ProductCycle { .. } => "product_cycle",
            Family::Cayley { .. } => "cayley",
            Family::Custom { .. } => "custom",
        }
    }

    /// Whether every graph of this family is vertex-transitive by
    /// construction. Custom graphs are reported as unverified.
    pub fn is_transitive(&self) -> bool {
        match self {
            Family::Torus { .. } | Family::Hypercube { .. } | Family::Cayley { .. } => true,
            Family::ProductCycle { base, .. } => base.is_transitive(),
            Family::CycleMatching { .. } | Family::RandomRegular { .. } | Family::Custom { .. } => {
                false
            }
        }
    }

    /// Ordered `key=value` parameters (the family name excluded).
    pub fn params(&self) -> Vec<(String, String)> {
        let kv = |k: &str, v: String| (k.to_string(), v);
        match self {
            Family::Torus { side, dim } => {
                vec![kv("side", side.to_string()), kv("dim", dim.to_string())]
            }
            Family::Hypercube { dim } => vec![kv("dim", dim.to_string())],
            Family::CycleMatching { n, seed } => {
                vec![kv("n", n.to_string()), kv("seed", seed.to_string())]
            }
            Family::RandomRegular { n, k, seed } => vec![
                kv("n", n.to_string()),
                kv("k", k.to_string()),
                kv("seed", seed.to_string()),
            ],
            Family::ProductCycle { base, k } => {
                vec![kv("k", k.to_string()), kv("base", base.to_string())]
            }
            Family::Cayley { spec } => spec.params(),
            Family::Custom { name } => vec![kv("name", name.clone())],
        }
    }

    /// Inverse of [`Family::name`] + [`Family::params`].
    pub fn from_params(name: &str, params: &[(String, String)]) -> Result<Family> {
        let mut p = Params::new(params);
        let fam = match name {
            "torus" => Family::Torus {
                side: p.usize("side")?,
                dim: p.usize("dim")?,
            },
            "hypercube" => Family::Hypercube {
                dim: p.usize("dim")?,
            },
            "cycle_matching" => Family::CycleMatching {
                n: p.usize("n")?,
                seed: p.u64("seed")?,
            },
            "random_regular" => Family::RandomRegular {
                n: p.usize("n")?,
                k: p.usize("k")?,
                seed: p.u64("seed")?,
            },
            "product_cycle" => Family::ProductCycle {
                k: p.usize("k")?,
                base: Box::new(p.str("base")?.parse()?),
            },
            "cayley" => Family::Cayley {
                spec: GroupSpec::from_params(&mut p)?,
            },
            "custom" => Family::Custom {
                name: p.str("name")?.to_string(),
            },
            other => return Err(Error::param("family", format!("unknown family `{other}`"))),
        };
        p.finish()?;
        Ok(fam)
    }

    /// Checks the parameters against the generator's rules and returns the
    /// vertex count, without building anything.
    pub fn validate(&self) -> Result<usize> {
        match self {
            Family::Torus { side, dim } => families::torus_order(*side, *dim),
            Family::Hypercube { dim } => families::hypercube_order(*dim),
            Family::CycleMatching { n, .. } => families::check_cycle_matching(*n),
            Family::RandomRegular { n, k, .. } => families::check_random_regular(*n, *k),
            Family::ProductCycle { base, k } => families::product_order(base.validate()?, *k),
            Family::Cayley { spec } => {
                Ok(GroupSpec::new(spec.group, spec.generators.clone())?.order())
            }
            Family::Custom { .. } => Err(Error::param("family", "custom graphs have no generator")),
        }
    }

    /// Runs the generator for this family.
    pub fn build(&self) -> Result<Graph> {
        match self {
            Family::Torus { side, dim } => families::make_torus(*side, *dim),
            Family::Hypercube { dim } => families::make_hypercube(*dim),
            Family::CycleMatching { n, seed } => {
                families::make_cycle_matching(*n, crate::Seed(*seed))
            }
            Family::RandomRegular { n, k, seed } => {
                families::make_random_regular(*n, *k, crate::Seed(*seed))
            }
            Family::ProductCycle { base, k } => families::make_product_cycle(&base.build()?, *k),
            Family::Cayley { spec } => families::make_cayley(spec),
            Family::Custom { .. } => Err(Error::param("family", "custom graphs have no generator")),
        }
    }
}

/// Compact descriptor: `torus:side=10,dim=2`. A `base=` parameter swallows
/// the rest of the string so products can nest.
impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for (i, (k, v)) in self.params().iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        let (name, mut rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = Vec::new();
        while !rest.is_empty() {
            if let Some(base) = rest.strip_prefix("base=") {
                params.push(("base".to_string(), base.to_string()));
                break;
            }
            let (item, tail) = rest.split_once(',').unwrap_or((rest, ""));
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::param("family", format!("expected key=value, got `{item}`"))
            })?;
            params.push((k.trim().to_string(), v.trim().to_string()));
            rest = tail;
        }
        Family::from_params(name.trim(), &params)
    }
}

/// Keyed parameter lookup that rejects leftovers.
pub(crate) struct Params<'a> {
    items: &'a [(String, String)],
    used: Vec<bool>,
}

impl<'a> Params<'a> {
    pub(crate) fn new(items: &'a [(String, String)]) -> Self {
        Params {
            items,
            used: vec![false; items.len()],
        }
    }

    pub(crate) fn get(&mut self, key: &str) -> Option<&'a str> {
        let i = self.items.iter().position(|(k, _)| k == key)?;
        self.used[i] = true;
        Some(self.items[i].1.as_str())
    }

    pub(crate) fn str(&mut self, key: &'static str) -> Result<&'a str> {
        self.get(key)
            .ok_or_else(|| Error::param(key, "missing family parameter"))
    }

    pub(crate) fn usize(&mut self, key: &'static str) -> Result<usize> {
        let v = self.str(key)?;
        v.parse()
            .map_err(|_| Error::param(key, format!("expected a non-negative integer, got `{v}`")))
    }

    pub(crate) fn u64(&mut self, key: &'static str) -> Result<u64> {
        let v = self.str(key)?;
        v.parse()
            .map_err(|_| Error::param(key, format!("expected a non-negative integer, got `{v}`")))
    }

    pub(crate) fn finish(self) -> Result<()> {
        match self.used.iter().position(|u| !u) {
            Some(i) => Err(Error::param(
                "family",
                format!("unexpected parameter `{}`", self.items[i].0),
            )),
            None => Ok(()),
        }
    }
}

/// An immutable finite simple graph.
///
/// Vertices are `0..n`. The edge list holds each edge once as `(u, v)` with
/// `u < v`, sorted lexicographically; the CSR arrays hold both directions
/// with each neighbor list sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    edges: Vec<(u32, u32)>,
    family: Family,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Rejects self-loops,
    /// out-of-range endpoints and duplicate edges (in either orientation).
    pub fn from_edges(n: usize, edges: &[(u32, u32)], family: Family) -> Result<Graph> {
        if n > u32::MAX as usize {
            return Err(Error::BudgetExceeded {
                requested: n as u128,
                budget: u32::MAX as usize,
            });
        }
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Graph::from_sorted_unique(n, norm, family))
    }

    /// `edges` must already be normalised, sorted and free of duplicates.
    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<(u32, u32)>, family: Family) -> Graph {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let mut degree = vec![0usize; n];
        for &(a, b) in &edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; 2 * edges.len()];
        // For vertex w, pairs (x, w) with x < w precede all pairs (w, y) in
        // sorted order, so each list comes out sorted.
        for &(a, b) in &edges {
            neighbors[fill[a as usize]] = b;
            fill[a as usize] += 1;
            neighbors[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        let max_degree = degree.iter().copied().max().unwrap_or(0);
        Graph {
            n,
            offsets,
            neighbors,
            edges,
            family,
            max_degree,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn csr_offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn csr_neighbors(&self) -> &[u32] {
        &self.neighbors
    }

    /// The uniform degree bound `K`.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        self.n == 0 || self.min_degree() == self.max_degree
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub(crate) fn with_family(mut self, family: Family) -> Graph {
        self.family = family;
        self
    }

    /// Checks the structural invariants: symmetric sorted adjacency, no
    /// loops or duplicates, and CSR identical to the one rebuilt from the
    /// edge list.
    pub fn check_invariants(&self) -> Result<()> {
        if self.offsets.len() != self.n + 1 || self.neighbors.len() != 2 * self.edges.len() {
            return Err(Error::InvalidGraph("CSR size mismatch".into()));
        }
        for v in 0..self.n {
            let nb = self.neighbors(v);
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "neighbors of {v} unsorted or repeated"
                )));
            }
            for &u in nb {
                if u as usize == v {
                    return Err(Error::InvalidGraph(format!("self-loop at {v}")));
                }
                if !self.has_edge(u as usize, v) {
                    return Err(Error::InvalidGraph(format!(
                        "asymmetric adjacency {v} -> {u}"
                    )));
                }
            }
        }
        let rebuilt = Graph::from_edges(self.n, &self.edges, self.family.clone())?;
        if rebuilt.offsets != self.offsets
            || rebuilt.neighbors != self.neighbors
            || rebuilt.edges != self.edges
        {
            return Err(Error::InvalidGraph("CSR and edge list disagree".into()));
        }
        Ok(())
    }
}
