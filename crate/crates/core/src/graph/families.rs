//! Generators for the graph families under study.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Family, Graph, GroupSpec, DEFAULT_VERTEX_BUDGET};
use crate::{Error, Result, Seed};

const REJECTION_ATTEMPTS: usize = 10_000;

fn check_budget(requested: u128) -> Result<usize> {
    if requested > DEFAULT_VERTEX_BUDGET as u128 {
        Err(Error::BudgetExceeded {
            requested,
            budget: DEFAULT_VERTEX_BUDGET,
        })
    } else {
        Ok(requested as usize)
    }
}

fn sorted_unique(mut edges: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    for e in edges.iter_mut() {
        if e.0 > e.1 {
            *e = (e.1, e.0);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

pub(crate) fn torus_order(side: usize, dim: usize) -> Result<usize> {
    if side < 3 {
        return Err(Error::param(
            "side",
            format!("torus side must be at least 3, got {side}"),
        ));
    }
    if dim < 1 {
        return Err(Error::param("dim", "torus dimension must be at least 1"));
    }
    check_budget((side as u128).saturating_pow(dim.min(128) as u32))
}

/// Cartesian torus `(Z/side)^dim`. Vertex `x` has index
/// `sum_i x_i * side^i`.
pub fn make_torus(side: usize, dim: usize) -> Result<Graph> {
    let n = torus_order(side, dim)?;
    let mut edges = Vec::with_capacity(n * dim);
    let mut stride = 1usize;
    for _ in 0..dim {
        for v in 0..n {
            let coord = (v / stride) % side;
            let w = if coord + 1 == side {
                v - coord * stride
            } else {
                v + stride
            };
            edges.push((v as u32, w as u32));
        }
        stride *= side;
    }
    Ok(Graph::from_sorted_unique(
        n,
        sorted_unique(edges),
        Family::Torus { side, dim },
    ))
}

/// The cycle `C_n`.
pub fn make_cycle(n: usize) -> Result<Graph> {
    make_torus(n, 1)
}

pub(crate) fn hypercube_order(dim: usize) -> Result<usize> {
    if dim < 1 {
        return Err(Error::param(
            "dim",
            "hypercube dimension must be at least 1",
        ));
    }
    if dim >= 64 {
        return Err(Error::BudgetExceeded {
            requested: u128::MAX,
            budget: DEFAULT_VERTEX_BUDGET,
        });
    }
    check_budget(1u128 << dim)
}

/// Hypercube `{0,1}^dim`: `i ~ i ^ (1 << j)`.
pub fn make_hypercube(dim: usize) -> Result<Graph> {
    let n = hypercube_order(dim)?;
    let mut edges = Vec::with_capacity(n * dim / 2);
    for v in 0..n {
        for j in 0..dim {
            let w = v ^ (1 << j);
            if v < w {
                edges.push((v as u32, w as u32));
            }
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_sorted_unique(
        n,
        edges,
        Family::Hypercube { dim },
    ))
}

pub(crate) fn check_cycle_matching(n: usize) -> Result<usize> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::param(
            "n",
            format!("cycle+matching needs an even n >= 4, got {n}"),
        ));
    }
    check_budget(n as u128)
}

/// A cycle on `n` vertices plus a uniformly random perfect matching, drawn
/// by whole-restart rejection until no matched pair is already a cycle edge.
/// The result is simple and 3-regular. For `n = 4` the matching is forced
/// and the result is `K_4`.
pub fn make_cycle_matching(n: usize, seed: Seed) -> Result<Graph> {
    check_cycle_matching(n)?;
    let mut rng = seed.stream(0);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let is_cycle_edge = |a: u32, b: u32| {
        let d = a.abs_diff(b) as usize;
        d == 1 || d == n - 1
    };
    for _ in 0..REJECTION_ATTEMPTS {
        perm.shuffle(&mut rng);
        if perm.chunks_exact(2).any(|p| is_cycle_edge(p[0], p[1])) {
            continue;
        }
        let mut edges: Vec<(u32, u32)> = (0..n as u32).map(|v| (v, (v + 1) % n as u32)).collect();
        edges.extend(perm.chunks_exact(2).map(|p| (p[0], p[1])));
        let edges = sorted_unique(edges);
        debug_assert_eq!(edges.len(), 3 * n / 2);
        return Ok(Graph::from_sorted_unique(
            n,
            edges,
            Family::CycleMatching { n, seed: seed.0 },
        ));
    }
    Err(Error::RejectionBudget {
        attempts: REJECTION_ATTEMPTS,
        what: "matching avoiding cycle edges",
    })
}

pub(crate) fn check_random_regular(n: usize, k: usize) -> Result<usize> {
    if k < 1 || k >= n {
        return Err(Error::param(
            "k",
            format!("need 1 <= k < n, got k = {k}, n = {n}"),
        ));
    }
    if !(n * k).is_multiple_of(2) {
        return Err(Error::param("n", format!("n*k = {} is odd", n * k)));
    }
    check_budget(n as u128)
}

/// Random `k`-regular simple graph from the pairing (configuration) model,
/// restarting from scratch whenever a loop or multi-edge appears.
pub fn make_random_regular(n: usize, k: usize, seed: Seed) -> Result<Graph> {
    check_random_regular(n, k)?;
    let mut rng = seed.stream(0);
    let mut stubs: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, k))
        .collect();
    'attempt: for _ in 0..REJECTION_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(n * k / 2);
        for p in stubs.chunks_exact(2) {
            if p[0] == p[1] {
                continue 'attempt;
            }
            edges.push((p[0].min(p[1]), p[0].max(p[1])));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return Ok(Graph::from_sorted_unique(
            n,
            edges,
            Family::RandomRegular { n, k, seed: seed.0 },
        ));
    }
    Err(Error::RejectionBudget {
        attempts: REJECTION_ATTEMPTS,
        what: "simple pairing",
    })
}

pub(crate) fn product_order(base_n: usize, k: usize) -> Result<usize> {
    if k < 3 {
        return Err(Error::param(
            "k",
            format!("cycle length must be at least 3, got {k}"),
        ));
    }
    check_budget(base_n as u128 * k as u128)
}

/// Cartesian product `g x C_k`. Vertex `(v, i)` has index `v + n*i`.
pub fn make_product_cycle(g: &Graph, k: usize) -> Result<Graph> {
    let n = g.n();
    let total = product_order(n, k)?;
    let mut edges = Vec::with_capacity(k * g.m() + total);
    for i in 0..k {
        let off = (n * i) as u32;
        edges.extend(g.edges().iter().map(|&(a, b)| (a + off, b + off)));
        let next = (n * ((i + 1) % k)) as u32;
        edges.extend((0..n as u32).map(|v| (v + off, v + next)));
    }
    Ok(Graph::from_sorted_unique(
        total,
        sorted_unique(edges),
        Family::ProductCycle {
            base: Box::new(g.family().clone()),
            k,
        },
    ))
}

/// Cayley graph: vertices are group elements in encoding order, `u ~ u*s`.
pub fn make_cayley(spec: &GroupSpec) -> Result<Graph> {
    // Re-validate: the fields are public.
    let spec = GroupSpec::new(spec.group, spec.generators.clone())?;
    let n = spec.order();
    let mut edges = Vec::with_capacity(n * spec.generators.len());
    for u in 0..n {
        for &s in &spec.generators {
            edges.push((u as u32, spec.group.mul(u, s) as u32));
        }
    }
    Ok(Graph::from_sorted_unique(
        n,
        sorted_unique(edges),
        Family::Cayley { spec },
    ))
}

/// `K_n`, as the Cayley graph of `Z/n` with every non-identity generator.
pub fn make_complete(n: usize) -> Result<Graph> {
    make_cayley(&GroupSpec::all_nonidentity(super::Group::Cyclic { m: n })?)
}

/// The path `0 - 1 - ... - (n-1)`.
pub fn make_path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::param("n", "path needs at least 2 vertices"));
    }
    let edges: Vec<(u32, u32)> = (0..n as u32 - 1).map(|v| (v, v + 1)).collect();
    Graph::from_edges(
        n,
        &edges,
        Family::Custom {
            name: format!("path_{n}"),
        },
    )
}

/// A uniformly random labelled tree on `n` vertices (random Prüfer code).
pub fn make_random_tree(n: usize, seed: Seed) -> Result<Graph> {
    if n < 2 {
        return Err(Error::param("n", "tree needs at least 2 vertices"));
    }
    let mut rng = seed.stream(0);
    if n == 2 {
        return Graph::from_edges(
            2,
            &[(0, 1)],
            Family::Custom {
                name: "tree_2".into(),
            },
        );
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    for &c in &code {
        let leaf = *leaves.iter().next().unwrap();
        leaves.remove(&leaf);
        edges.push((leaf as u32, c as u32));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    edges.push((rest[0] as u32, rest[1] as u32));
    Graph::from_edges(
        n,
        &edges,
        Family::Custom {
            name: format!("tree_{n}"),
        },
    )
}

/// Circulant graph on `Z/n` with connection set `±offsets`.
pub fn make_circulant(n: usize, offsets: &[i64]) -> Result<Graph> {
    let gens: Vec<i64> = offsets.iter().flat_map(|&o| [o, -o]).collect();
    make_cayley(&GroupSpec::cyclic(n, &gens)?)
}
