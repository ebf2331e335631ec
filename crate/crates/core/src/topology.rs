//! Invariants computed from residue counts: Euler characteristic, rank
//! bound for the fundamental group, Betti number `β₂`, regular genus, and
//! sphere / manifold recognition.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::Code;
use crate::graph::{census, ColourSet, ColouredGraph, ResidueCensus};
use crate::moves::{reduce, MoveError};

/// Largest order for which reduction to the standard graph is a complete
/// 3-sphere recognition test.
pub const S3_RECOGNITION_MAX_ORDER: usize = 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("graph is not contracted")]
    NotContracted,
    #[error("rank bound is {0}, no simply-connectedness certificate")]
    NotSimplyConnectedCertificate(usize),
    #[error("graph is not bipartite")]
    NonBipartite,
    #[error("order {0} exceeds the 3-sphere recognition bound")]
    OrderTooLarge(usize),
    #[error("not a gem of a closed 3-manifold")]
    NotAManifoldGem,
    #[error("expected {expected} colours, got {got}")]
    WrongColours { expected: usize, got: usize },
    #[error(transparent)]
    Move(#[from] MoveError),
}

/// χ from the residue counts of any coloured graph:
/// `(-1)^(n-1) p (n-1) + Σ_{h=2}^{n} (-1)^(n-h) Σ_{#B=h} g_B`, counting the
/// `h`-residues as the `(n-h)`-simplices of the pseudo-complex.
pub fn euler_from_census(c: &ResidueCensus) -> i64 {
    let n = c.colours() as i64 - 1;
    let p = c.p() as i64;
    let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
    let mut chi = sign * p * (n - 1);
    for h in 2..=n {
        let s = if (n - h) % 2 == 0 { 1 } else { -1 };
        chi += s * c.total(h as usize) as i64;
    }
    chi
}

/// The 4-dimensional crystallization formula `5 - Σ g_ijk + Σ g_ij - 3p`.
pub fn euler_crystallization_4(c: &ResidueCensus) -> i64 {
    5 - c.total(3) as i64 + c.total(2) as i64 - 3 * c.p() as i64
}

pub fn euler_characteristic(g: &ColouredGraph) -> i64 {
    euler_from_census(&census(g))
}

fn require_contracted(g: &ColouredGraph, c: &ResidueCensus) -> Result<(), TopologyError> {
    if (0..g.colours()).all(|i| c.g_hat(i) == 1) {
        Ok(())
    } else {
        Err(TopologyError::NotContracted)
    }
}

/// `min { g_B - 1 : #B = n - 1 }`, an upper bound for `rk π₁`.
pub fn rank_bound_from_census(c: &ResidueCensus) -> usize {
    let n = c.colours() - 1;
    c.iter()
        .filter(|(b, _)| b.len() == n - 1)
        .map(|(_, g)| g - 1)
        .min()
        .unwrap_or(0)
}

pub fn rank_bound(g: &ColouredGraph) -> Result<usize, TopologyError> {
    let c = census(g);
    require_contracted(g, &c)?;
    Ok(rank_bound_from_census(&c))
}

/// `β₂ = χ - 2`, valid for bipartite crystallizations with rank bound 0.
pub fn betti2(g: &ColouredGraph) -> Result<i64, TopologyError> {
    let c = census(g);
    require_contracted(g, &c)?;
    if !g.is_bipartite() {
        return Err(TopologyError::NonBipartite);
    }
    let r = rank_bound_from_census(&c);
    if r != 0 {
        return Err(TopologyError::NotSimplyConnectedCertificate(r));
    }
    Ok(euler_from_census(&c) - 2)
}

/// A cyclic ordering of the colours `0..=n`, normalized with the last entry
/// `n` and the first entry smaller than the one before `n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicPermutation(pub Vec<usize>);

impl CyclicPermutation {
    /// The `n!/2` cyclic orderings of `0..=n` up to rotation and reversal.
    pub fn all(n: usize) -> Vec<CyclicPermutation> {
        crate::code::permutations(n)
            .into_iter()
            .filter(|p| n < 2 || p[0] < p[n - 1])
            .map(|mut p| {
                p.push(n);
                CyclicPermutation(p)
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry at a cyclic index.
    pub fn at(&self, i: isize) -> usize {
        let m = self.0.len() as isize;
        self.0[i.rem_euclid(m) as usize]
    }

    /// Consecutive colour pairs, cyclically.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.0.len()).map(move |i| (self.at(i as isize), self.at(i as isize + 1)))
    }

    pub fn without(&self, colour: usize) -> Vec<usize> {
        self.0.iter().copied().filter(|&c| c != colour).collect()
    }
}

impl std::fmt::Display for CyclicPermutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", s.join(" "))
    }
}

/// Genus of the regular embedding of a cyclic colour sequence, from
/// `Σ g_{e_i e_{i+1}} + (1 - m) p = 2 - 2ρ` where `m + 1` is the length of
/// the sequence. Returns `None` when the formula gives no non-negative
/// integer (possible only for graphs that are not such embeddings).
fn genus_of_cycle(c: &ResidueCensus, cycle: &[usize]) -> Option<i64> {
    let m = cycle.len() as i64 - 1;
    let len = cycle.len();
    let sum: i64 = (0..len)
        .map(|i| c.g2(cycle[i], cycle[(i + 1) % len]) as i64)
        .sum();
    let twice = 2 - sum - (1 - m) * c.p() as i64;
    (twice >= 0 && twice % 2 == 0).then_some(twice / 2)
}

/// `ρ_ε` for a bipartite graph.
pub fn genus_for(g: &ColouredGraph, eps: &CyclicPermutation) -> Result<i64, TopologyError> {
    if !g.is_bipartite() {
        return Err(TopologyError::NonBipartite);
    }
    let c = census(g);
    genus_of_cycle(&c, &eps.0).ok_or(TopologyError::NonBipartite)
}

/// Regular genus: the minimum of `ρ_ε` over all cyclic permutations, with
/// the full table.
pub fn regular_genus(
    g: &ColouredGraph,
) -> Result<(i64, BTreeMap<CyclicPermutation, i64>), TopologyError> {
    if !g.is_bipartite() {
        return Err(TopologyError::NonBipartite);
    }
    let c = census(g);
    regular_genus_from_census(&c)
}

fn regular_genus_from_census(
    c: &ResidueCensus,
) -> Result<(i64, BTreeMap<CyclicPermutation, i64>), TopologyError> {
    let mut table = BTreeMap::new();
    for eps in CyclicPermutation::all(c.colours() - 1) {
        let rho = genus_of_cycle(c, &eps.0).ok_or(TopologyError::NonBipartite)?;
        table.insert(eps, rho);
    }
    let min = table.values().copied().min().unwrap_or(0);
    Ok((min, table))
}

/// Genus of the residue `Γ_{ε̂_i}` with respect to the cyclic permutation
/// induced by `ε` on the remaining colours (index `i` is cyclic).
pub fn residue_genus(
    g: &ColouredGraph,
    eps: &CyclicPermutation,
    i: isize,
) -> Result<i64, TopologyError> {
    if !g.is_bipartite() {
        return Err(TopologyError::NonBipartite);
    }
    let c = census(g);
    require_contracted(g, &c)?;
    residue_genus_from_census(&c, eps, i)
}

fn residue_genus_from_census(
    c: &ResidueCensus,
    eps: &CyclicPermutation,
    i: isize,
) -> Result<i64, TopologyError> {
    let reduced = eps.without(eps.at(i));
    genus_of_cycle(c, &reduced).ok_or(TopologyError::NonBipartite)
}

/// Every colour triple has exactly one residue (4-dimensional graphs).
pub fn is_simple(g: &ColouredGraph) -> Result<bool, TopologyError> {
    let c = census(g);
    require_contracted(g, &c)?;
    let simple = c.iter().filter(|(b, _)| b.len() == 3).all(|(_, x)| x == 1);
    Ok(simple)
}

/// Every component of every 3-residue is a 2-sphere: `Σ_pairs g - v/2 = 2`.
pub fn three_residues_are_spheres(g: &ColouredGraph) -> bool {
    let k = g.colours();
    for bits in 0u32..(1 << k) {
        if bits.count_ones() != 3 {
            continue;
        }
        let set = ColourSet::from_bits(bits);
        let cols: Vec<usize> = set.iter().collect();
        let res = g.residues(set).expect("valid colour set");
        let mut faces = vec![0i64; res.count()];
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let pair = ColourSet::single(cols[a]).with(cols[b]);
            let r2 = g.residues(pair).expect("valid colour set");
            let mut seen = vec![false; r2.count()];
            for v in 0..g.order() {
                let id = r2.membership[v] as usize;
                if !seen[id] {
                    seen[id] = true;
                    faces[res.membership[v] as usize] += 1;
                }
            }
        }
        for (comp, &size) in res.sizes.iter().enumerate() {
            if faces[comp] - size as i64 / 2 != 2 {
                return false;
            }
        }
    }
    true
}

/// Recognizes gems of the 3-sphere up to order 22 by reduction to the
/// standard two-vertex graph.
pub fn recognize_s3(g: &ColouredGraph) -> Result<bool, TopologyError> {
    if g.colours() != 4 {
        return Err(TopologyError::WrongColours {
            expected: 4,
            got: g.colours(),
        });
    }
    if g.order() > S3_RECOGNITION_MAX_ORDER {
        return Err(TopologyError::OrderTooLarge(g.order()));
    }
    if !three_residues_are_spheres(g) {
        return Err(TopologyError::NotAManifoldGem);
    }
    if !g.is_connected() {
        return Ok(false);
    }
    let r = reduce(g)?;
    Ok(r.graph.order() == 2 && r.handles() == 0)
}

/// Every component of every `Γ_ĉ` of a 5-coloured graph is a gem of the
/// 3-sphere.
pub fn is_manifold_crystallization(g: &ColouredGraph) -> Result<bool, TopologyError> {
    if g.colours() != 5 {
        return Err(TopologyError::WrongColours {
            expected: 5,
            got: g.colours(),
        });
    }
    for c in 0..5 {
        for comp in g.residue_graphs(g.all_colours().without(c)).expect("valid") {
            match recognize_s3(&comp) {
                Ok(true) => {}
                Ok(false) | Err(TopologyError::NotAManifoldGem) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(true)
}

/// Per-graph invariants, serialized one record per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub code: String,
    pub order: usize,
    pub bipartite: bool,
    pub chi: i64,
    pub rank_bound: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta2: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub genus: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub genus_by_permutation: Option<BTreeMap<String, i64>>,
    pub simple: bool,
}

/// Invariants of a 5-coloured crystallization.
pub fn invariants(g: &ColouredGraph, code: &Code) -> Result<InvariantRecord, TopologyError> {
    if g.colours() != 5 {
        return Err(TopologyError::WrongColours {
            expected: 5,
            got: g.colours(),
        });
    }
    let c = census(g);
    require_contracted(g, &c)?;
    let bipartite = g.is_bipartite();
    let chi = euler_from_census(&c);
    let rank = rank_bound_from_census(&c);
    let beta2 = (bipartite && rank == 0).then_some(chi - 2);
    let (genus, table) = if bipartite {
        let (min, table) = regular_genus_from_census(&c)?;
        (
            Some(min),
            Some(table.into_iter().map(|(k, v)| (k.to_string(), v)).collect()),
        )
    } else {
        (None, None)
    };
    let simple = c.iter().filter(|(b, _)| b.len() == 3).all(|(_, x)| x == 1);
    Ok(InvariantRecord {
        code: code.to_string(),
        order: g.order(),
        bipartite,
        chi,
        rank_bound: rank,
        beta2,
        genus,
        genus_by_permutation: table,
        simple,
    })
}

/// The identities relating `ρ_ε`, the residue genera and the 3-residue
/// counts of a bipartite 4-dimensional manifold crystallization, for every
/// cyclic permutation `ε` and `i` in `Z_5`:
///
/// - (a) `g_{ε(i-1) ε(i) ε(i+2)} = 1 + ρ_ε - ρ̂_{ε(i+1)} - ρ̂_{ε(i+3)}`
/// - (b) the sum of (a) over `i`: `Σ g = 5 + 5ρ_ε - 2 Σ ρ̂`
/// - (c) `χ = 2 - 2ρ_ε + Σ ρ̂`
///
/// (a) follows from the genus formula applied to `Γ` and to its 4-residues
/// together with `2 g_{ijk} = g_{ij} + g_{ik} + g_{jk} - p`; the triple it
/// involves is `{ε(i-1), ε(i), ε(i+2)}`, not three consecutive colours (the
/// two readings agree only when every `g_{ijk}` is 1). Returns the number of
/// identities checked, or a description of the first failure.
pub fn check_genus_relations(g: &ColouredGraph) -> Result<usize, String> {
    let c = census(g);
    let chi = euler_from_census(&c);
    let mut checked = 0;
    for eps in CyclicPermutation::all(4) {
        let rho = genus_of_cycle(&c, &eps.0).ok_or("non-integral genus")?;
        let hat: Vec<i64> = (0..5)
            .map(|i| residue_genus_from_census(&c, &eps, i).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let hat_at = |i: isize| hat[i.rem_euclid(5) as usize];
        let mut sum_triples = 0;
        for i in 0..5isize {
            let t = c.g3(eps.at(i - 1), eps.at(i), eps.at(i + 2)) as i64;
            sum_triples += t;
            if t != 1 + rho - hat_at(i + 1) - hat_at(i + 3) {
                return Err(format!("relation (a) fails at {eps} i={i}"));
            }
            checked += 1;
        }
        let hat_sum: i64 = hat.iter().sum();
        if sum_triples != 5 + 5 * rho - 2 * hat_sum {
            return Err(format!("relation (b) fails at {eps}"));
        }
        if chi != 2 - 2 * rho + hat_sum {
            return Err(format!("relation (c) fails at {eps}"));
        }
        checked += 2;
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_invariants() {
        let g = ColouredGraph::standard(5);
        let c = census(&g);
        assert_eq!(euler_from_census(&c), 2);
        assert_eq!(euler_crystallization_4(&c), 2);
        assert_eq!(rank_bound(&g).unwrap(), 0);
        assert_eq!(betti2(&g).unwrap(), 0);
        let (genus, table) = regular_genus(&g).unwrap();
        assert_eq!(genus, 0);
        assert_eq!(table.len(), 12);
        assert!(is_simple(&g).unwrap());
        for eps in CyclicPermutation::all(4) {
            for i in 0..5 {
                assert_eq!(residue_genus(&g, &eps, i).unwrap(), 0);
            }
        }
        assert_eq!(check_genus_relations(&g).unwrap(), 12 * 7);
        assert!(is_manifold_crystallization(&g).unwrap());
    }

    #[test]
    fn cyclic_permutations() {
        let all = CyclicPermutation::all(4);
        assert_eq!(all.len(), 12);
        assert!(all.iter().all(|e| e.0[4] == 4 && e.0[0] < e.0[3]));
        assert_eq!(CyclicPermutation::all(3).len(), 3);
    }

    #[test]
    fn s3_recognition_small() {
        assert!(recognize_s3(&ColouredGraph::standard(4)).unwrap());
        assert!(matches!(
            recognize_s3(&ColouredGraph::standard(5)),
            Err(TopologyError::WrongColours { .. })
        ));
    }

    #[test]
    fn non_contracted_errors() {
        let g = ColouredGraph::standard(5);
        let (h, _) = crate::moves::insert_dipole(&g, 0, ColourSet::single(0)).unwrap();
        assert!(!h.is_contracted());
        assert_eq!(rank_bound(&h), Err(TopologyError::NotContracted));
        assert_eq!(is_simple(&h), Err(TopologyError::NotContracted));
        assert_eq!(euler_characteristic(&h), 2);
    }
}
