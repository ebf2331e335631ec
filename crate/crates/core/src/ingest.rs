//! From a simplicial triangulation to a gem (barycentric subdivision) and
//! on to a rigid dipole-free crystallization.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::code::permutations;
use crate::graph::{ColouredGraph, GraphError};
use crate::moves::{reduce, MoveError, Reduction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("facet {0} does not have n + 1 distinct vertices")]
    NotPure(usize),
    #[error("a codimension-one face lies in {0} facets (must be 2)")]
    NotClosed(usize),
    #[error("vertex {0} out of range")]
    InvalidVertex(usize),
    #[error("no facets")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Move(#[from] MoveError),
}

/// A pure closed `n`-dimensional pseudo-manifold given by its facets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetComplex {
    dimension: usize,
    vertices: usize,
    /// Sorted 0-based vertex lists.
    facets: Vec<Vec<usize>>,
}

impl FacetComplex {
    pub fn new(dimension: usize, vertices: usize, facets: Vec<Vec<usize>>) -> Result<Self, IngestError> {
        if facets.is_empty() {
            return Err(IngestError::Empty);
        }
        let mut sorted = Vec::with_capacity(facets.len());
        for (i, f) in facets.into_iter().enumerate() {
            if let Some(&v) = f.iter().find(|&&v| v >= vertices) {
                return Err(IngestError::InvalidVertex(v));
            }
            let set: BTreeSet<usize> = f.iter().copied().collect();
            if set.len() != dimension + 1 || f.len() != dimension + 1 {
                return Err(IngestError::NotPure(i));
            }
            sorted.push(set.into_iter().collect::<Vec<_>>());
        }
        let k = FacetComplex {
            dimension,
            vertices,
            facets: sorted,
        };
        for (_, holders) in k.ridges() {
            if holders.len() != 2 {
                return Err(IngestError::NotClosed(holders.len()));
            }
        }
        Ok(k)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    /// Codimension-one faces and the facets containing them.
    fn ridges(&self) -> HashMap<Vec<usize>, Vec<usize>> {
        let mut map: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (i, f) in self.facets.iter().enumerate() {
            for skip in 0..f.len() {
                let ridge: Vec<usize> = f
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &v)| v)
                    .collect();
                map.entry(ridge).or_default().push(i);
            }
        }
        map
    }

    /// Simplicial Euler characteristic.
    pub fn euler_characteristic(&self) -> i64 {
        let mut chi = 0i64;
        for size in 1..=self.dimension + 1 {
            let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
            for f in &self.facets {
                for mask in 0u32..(1 << f.len()) {
                    if mask.count_ones() as usize == size {
                        faces.insert(
                            (0..f.len())
                                .filter(|&j| mask & (1 << j) != 0)
                                .map(|j| f[j])
                                .collect(),
                        );
                    }
                }
            }
            let sign = if size % 2 == 1 { 1 } else { -1 };
            chi += sign * faces.len() as i64;
        }
        chi
    }
}

/// The gem of the barycentric subdivision. Its vertices are the flags
/// `σ_0 ⊂ σ_1 ⊂ … ⊂ σ_n` of faces of `K`, i.e. the facets with an ordering
/// of their vertices, numbered by facet and then by the lexicographic rank
/// of the ordering. Flags differing only in their `i`-dimensional face are
/// joined by colour `i`.
pub fn barycentric_gem(k: &FacetComplex) -> Result<ColouredGraph, IngestError> {
    let n = k.dimension;
    let perms = permutations(n + 1);
    let per_facet = perms.len();
    let order = per_facet * k.facets.len();
    // flag (as ordered vertex tuple) -> index
    let mut index: HashMap<Vec<usize>, usize> = HashMap::with_capacity(order);
    for (fi, f) in k.facets.iter().enumerate() {
        for (pi, p) in perms.iter().enumerate() {
            index.insert(p.iter().map(|&j| f[j]).collect(), fi * per_facet + pi);
        }
    }
    let ridges = k.ridges();
    let mut matchings = vec![vec![0usize; order]; n + 1];
    for (flag, &id) in &index {
        // colour i < n: swap the i-th and (i+1)-th vertices
        for (i, m) in matchings.iter_mut().enumerate().take(n) {
            let mut other = flag.clone();
            other.swap(i, i + 1);
            m[id] = index[&other];
        }
        // colour n: replace the last vertex using the facet across the ridge
        let mut ridge: Vec<usize> = flag[..n].to_vec();
        ridge.sort_unstable();
        let fi = id / per_facet;
        let across = ridges[&ridge]
            .iter()
            .copied()
            .find(|&g| g != fi)
            .ok_or(IngestError::NotClosed(1))?;
        let apex = k.facets[across]
            .iter()
            .copied()
            .find(|v| !ridge.contains(v))
            .expect("facet has one vertex off the ridge");
        let mut other = flag.clone();
        other[n] = apex;
        matchings[n][id] = index[&other];
    }
    Ok(ColouredGraph::build(order, &matchings, false)?)
}

/// Reduces a gem of a closed manifold to a rigid dipole-free
/// crystallization, reporting split-off handles.
pub fn crystallize(g: &ColouredGraph) -> Result<Reduction, IngestError> {
    Ok(reduce(g)?)
}

/// The boundary of the `(n+1)`-simplex as an `n`-dimensional complex.
pub fn simplex_boundary(n: usize) -> FacetComplex {
    let facets = (0..n + 2)
        .map(|skip| (0..n + 2).filter(|&v| v != skip).collect())
        .collect();
    FacetComplex::new(n, n + 2, facets).expect("the boundary of a simplex is closed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_from_triangle_boundary() {
        let k = simplex_boundary(1);
        assert_eq!(k.euler_characteristic(), 0);
        let g = barycentric_gem(&k).unwrap();
        assert_eq!(g.order(), 6);
        assert!(g.is_connected());
    }

    #[test]
    fn not_closed_rejected() {
        let k = FacetComplex::new(1, 3, vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(k, Err(IngestError::NotClosed(1)));
        let k = FacetComplex::new(1, 3, vec![vec![0, 0]]);
        assert_eq!(k, Err(IngestError::NotPure(0)));
    }
}
