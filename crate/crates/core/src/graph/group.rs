//! The finite groups behind Cayley graphs.
//!
//! Elements are encoded as integers `0..order`, with `0` the identity:
//!
//! * cyclic `Z/m`: the residue itself;
//! * power `(Z/m)^d`: mixed radix, coordinate 0 least significant (this
//!   matches the vertex numbering of [`make_torus`](super::families::make_torus));
//! * symmetric `S_m`: lexicographic rank of the permutation in one-line form;
//! * dihedral `D_m`: `r^i s^j` is `i + m*j`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Params, DEFAULT_VERTEX_BUDGET};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Group {
    Cyclic { m: usize },
    Power { m: usize, d: usize },
    Symmetric { m: usize },
    Dihedral { m: usize },
}

impl Group {
    pub fn name(&self) -> &'static str {
        match self {
            Group::Cyclic { .. } => "cyclic",
            Group::Power { .. } => "power",
            Group::Symmetric { .. } => "symmetric",
            Group::Dihedral { .. } => "dihedral",
        }
    }

    fn checked_order(&self) -> Result<usize> {
        let order: u128 = match *self {
            Group::Cyclic { m } if m >= 2 => m as u128,
            Group::Power { m, d } if m >= 2 && d >= 1 => {
                let mut o: u128 = 1;
                for _ in 0..d {
                    o = o.saturating_mul(m as u128);
                }
                o
            }
            Group::Symmetric { m } if (2..=12).contains(&m) => (1..=m as u128).product(),
            Group::Dihedral { m } if m >= 3 => 2 * m as u128,
            _ => {
                return Err(Error::InvalidGroup(format!(
                    "unsupported parameters {self:?}"
                )))
            }
        };
        if order > DEFAULT_VERTEX_BUDGET as u128 {
            return Err(Error::BudgetExceeded {
                requested: order,
                budget: DEFAULT_VERTEX_BUDGET,
            });
        }
        Ok(order as usize)
    }

    /// Number of elements. Panics on parameters rejected by [`GroupSpec::new`].
    pub fn order(&self) -> usize {
        self.checked_order()
            .expect("group parameters validated at construction")
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// The product `a * b`.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match *self {
            Group::Cyclic { m } => (a + b) % m,
            Group::Power { m, d } => {
                let (mut x, mut y, mut out, mut scale) = (a, b, 0, 1);
                for _ in 0..d {
                    out += ((x % m + y % m) % m) * scale;
                    x /= m;
                    y /= m;
                    scale *= m;
                }
                out
            }
            Group::Symmetric { m } => {
                let (p, q) = (unrank_perm(a, m), unrank_perm(b, m));
                let composed: Vec<usize> = (0..m).map(|i| p[q[i]]).collect();
                rank_perm(&composed)
            }
            Group::Dihedral { m } => {
                let (ra, sa) = (a % m, a / m);
                let (rb, sb) = (b % m, b / m);
                let r = if sa == 0 {
                    (ra + rb) % m
                } else {
                    (ra + m - rb) % m
                };
                r + m * ((sa + sb) % 2)
            }
        }
    }

    pub fn inverse(&self, a: usize) -> usize {
        match *self {
            Group::Cyclic { m } => (m - a % m) % m,
            Group::Power { m, d } => {
                let (mut x, mut out, mut scale) = (a, 0, 1);
                for _ in 0..d {
                    out += ((m - x % m) % m) * scale;
                    x /= m;
                    scale *= m;
                }
                out
            }
            Group::Symmetric { m } => {
                let p = unrank_perm(a, m);
                let mut inv = vec![0; m];
                for (i, &pi) in p.iter().enumerate() {
                    inv[pi] = i;
                }
                rank_perm(&inv)
            }
            Group::Dihedral { m } => {
                if a / m == 0 {
                    (m - a) % m
                } else {
                    a
                }
            }
        }
    }

    /// Distances from the identity in the Cayley graph with generator set
    /// `gens` (right multiplication). Unreached elements get `usize::MAX`.
    pub fn word_lengths(&self, gens: &[usize]) -> Vec<usize> {
        let order = self.order();
        let mut dist = vec![usize::MAX; order];
        let mut queue = VecDeque::new();
        dist[0] = 0;
        queue.push_back(0);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Diameter of the Cayley graph on `gens`, or `None` when `gens` does
    /// not generate. Cayley graphs are vertex-transitive, so this is the
    /// eccentricity of the identity.
    pub fn cayley_diameter(&self, gens: &[usize]) -> Option<usize> {
        let d = self.word_lengths(gens);
        if d.contains(&usize::MAX) {
            None
        } else {
            d.into_iter().max()
        }
    }

    /// Permutation for an element of `S_m`.
    pub fn permutation(&self, a: usize) -> Option<Vec<usize>> {
        match *self {
            Group::Symmetric { m } => Some(unrank_perm(a, m)),
            _ => None,
        }
    }
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// Lexicographic rank of a permutation of `0..m`.
pub(crate) fn rank_perm(p: &[usize]) -> usize {
    let m = p.len();
    let mut rank = 0;
    for i in 0..m {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        rank += smaller * factorial(m - 1 - i);
    }
    rank
}

pub(crate) fn unrank_perm(mut rank: usize, m: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..m).collect();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let f = factorial(m - 1 - i);
        out.push(pool.remove(rank / f));
        rank %= f;
    }
    out
}

/// A group plus a symmetric, identity-free generating set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub group: Group,
    /// Encoded elements, sorted and deduplicated.
    pub generators: Vec<usize>,
}

impl GroupSpec {
    /// Validates the generating set: in range, identity-free, closed under
    /// inverses, and generating the whole group.
    pub fn new(group: Group, mut generators: Vec<usize>) -> Result<GroupSpec> {
        let order = group.checked_order()?;
        generators.sort_unstable();
        generators.dedup();
        if let Some(&g) = generators.iter().find(|&&g| g >= order) {
            return Err(Error::InvalidGroup(format!(
                "generator {g} out of range (order {order})"
            )));
        }
        if generators.contains(&group.identity()) {
            return Err(Error::InvalidGroup(
                "generator set contains the identity".into(),
            ));
        }
        for &g in &generators {
            if generators.binary_search(&group.inverse(g)).is_err() {
                return Err(Error::InvalidGroup(format!(
                    "generator set is not inverse-closed: {g} present, {} missing",
                    group.inverse(g)
                )));
            }
        }
        if group.cayley_diameter(&generators).is_none() {
            return Err(Error::InvalidGroup(
                "generators do not generate the group".into(),
            ));
        }
        Ok(GroupSpec { group, generators })
    }

    pub fn cyclic(m: usize, gens: &[i64]) -> Result<GroupSpec> {
        let enc = gens
            .iter()
            .map(|&g| g.rem_euclid(m.max(1) as i64) as usize)
            .collect();
        GroupSpec::new(Group::Cyclic { m }, enc)
    }

    /// Generators given as coordinate vectors of length `d`.
    pub fn power(m: usize, d: usize, gens: &[Vec<i64>]) -> Result<GroupSpec> {
        let mut enc = Vec::new();
        for g in gens {
            if g.len() != d {
                return Err(Error::InvalidGroup(format!(
                    "generator {g:?} does not have {d} coordinates"
                )));
            }
            let mut x = 0usize;
            for &c in g.iter().rev() {
                x = x * m + c.rem_euclid(m.max(1) as i64) as usize;
            }
            enc.push(x);
        }
        GroupSpec::new(Group::Power { m, d }, enc)
    }

    /// Generators given as permutations of `0..m` in one-line form.
    pub fn symmetric(m: usize, gens: &[Vec<usize>]) -> Result<GroupSpec> {
        let mut enc = Vec::new();
        for p in gens {
            let mut seen = vec![false; m];
            if p.len() != m
                || p.iter()
                    .any(|&x| x >= m || std::mem::replace(&mut seen[x], true))
            {
                return Err(Error::InvalidGroup(format!(
                    "{p:?} is not a permutation of 0..{m}"
                )));
            }
            enc.push(rank_perm(p));
        }
        GroupSpec::new(Group::Symmetric { m }, enc)
    }

    /// Generators `r^rot s^refl`.
    pub fn dihedral(m: usize, gens: &[(i64, bool)]) -> Result<GroupSpec> {
        let enc = gens
            .iter()
            .map(|&(r, s)| r.rem_euclid(m.max(1) as i64) as usize + if s { m } else { 0 })
            .collect();
        GroupSpec::new(Group::Dihedral { m }, enc)
    }

    /// `±1`, `±e_i`, adjacent transpositions, or `{r, r^-1, s}`.
    pub fn standard(group: Group) -> Result<GroupSpec> {
        match group {
            Group::Cyclic { m } => GroupSpec::cyclic(m, &[1, -1]),
            Group::Power { m, d } => {
                let mut gens = Vec::new();
                for i in 0..d {
                    for sign in [1, -1] {
                        let mut v = vec![0; d];
                        v[i] = sign;
                        gens.push(v);
                    }
                }
                GroupSpec::power(m, d, &gens)
            }
            Group::Symmetric { m } => {
                let gens: Vec<Vec<usize>> = (0..m.saturating_sub(1))
                    .map(|i| transposition(m, i, i + 1))
                    .collect();
                GroupSpec::symmetric(m, &gens)
            }
            Group::Dihedral { m } => GroupSpec::dihedral(m, &[(1, false), (-1, false), (0, true)]),
        }
    }

    /// Every non-identity element (the complete graph on the group).
    pub fn all_nonidentity(group: Group) -> Result<GroupSpec> {
        let order = group.checked_order()?;
        GroupSpec::new(group, (1..order).collect())
    }

    pub fn all_transpositions(m: usize) -> Result<GroupSpec> {
        let mut gens = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                gens.push(transposition(m, i, j));
            }
        }
        GroupSpec::symmetric(m, &gens)
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub(crate) fn params(&self) -> Vec<(String, String)> {
        let mut out = vec![("group".to_string(), self.group.name().to_string())];
        match self.group {
            Group::Cyclic { m } | Group::Symmetric { m } | Group::Dihedral { m } => {
                out.push(("m".into(), m.to_string()));
            }
            Group::Power { m, d } => {
                out.push(("m".into(), m.to_string()));
                out.push(("d".into(), d.to_string()));
            }
        }
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        out.push(("gens".into(), gens.join(";")));
        out
    }

    /// Reads `group`, `m`, `d` and `gens`. `gens` is a `;`-separated list of
    /// encoded elements or one of `standard`, `all`, `all_transpositions`.
    pub(crate) fn from_params(p: &mut Params<'_>) -> Result<GroupSpec> {
        let group = match p.str("group")? {
            "cyclic" => Group::Cyclic { m: p.usize("m")? },
            "power" => Group::Power {
                m: p.usize("m")?,
                d: p.usize("d")?,
            },
            "symmetric" => Group::Symmetric { m: p.usize("m")? },
            "dihedral" => Group::Dihedral { m: p.usize("m")? },
            other => return Err(Error::InvalidGroup(format!("unknown group kind `{other}`"))),
        };
        match p.get("gens").unwrap_or("standard") {
            "standard" => GroupSpec::standard(group),
            "all" => GroupSpec::all_nonidentity(group),
            "all_transpositions" => match group {
                Group::Symmetric { m } => GroupSpec::all_transpositions(m),
                _ => Err(Error::InvalidGroup(
                    "all_transpositions needs a symmetric group".into(),
                )),
            },
            list => {
                let gens = list
                    .split(';')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidGroup(format!("bad generator `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                GroupSpec::new(group, gens)
            }
        }
    }
}

fn transposition(m: usize, i: usize, j: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).collect();
    p.swap(i, j);
    p
}
