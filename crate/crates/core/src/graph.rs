//! Regular edge-coloured multigraphs stored as one involution per colour.
//!
//! Vertices are indexed `0..order` internally. Text formats and the
//! classification parameters use the 1-based numbering `1..=order`.

use std::fmt;

use thiserror::Error;

/// Maximum number of colours supported by [`ColourSet`].
pub const MAX_COLOURS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("order {0} is odd")]
    OddOrder(usize),
    #[error("colour {colour} fixes vertex {vertex}")]
    FixedPoint { colour: usize, vertex: usize },
    #[error("colour {colour} is not an involution at vertex {vertex}")]
    NotInvolution { colour: usize, vertex: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("expected {expected} matchings, got {got}")]
    ColourCount { expected: usize, got: usize },
    #[error("matching for colour {colour} has length {len}, expected {order}")]
    MatchingLength {
        colour: usize,
        len: usize,
        order: usize,
    },
    #[error("vertex {0} out of range")]
    InvalidVertex(usize),
    #[error("colour {0} out of range")]
    InvalidColour(usize),
    #[error("empty colour set")]
    EmptyColourSet,
    #[error("unsupported colour count {0}")]
    UnsupportedColours(usize),
}

/// A set of colours, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ColourSet(u32);

impl ColourSet {
    pub const EMPTY: ColourSet = ColourSet(0);

    pub fn from_bits(bits: u32) -> Self {
        ColourSet(bits)
    }

    /// All colours `0..n`.
    pub fn full(n: usize) -> Self {
        ColourSet(((1u64 << n) - 1) as u32)
    }

    pub fn single(c: usize) -> Self {
        ColourSet(1 << c)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, c: usize) -> bool {
        self.0 & (1 << c) != 0
    }

    pub fn with(self, c: usize) -> Self {
        ColourSet(self.0 | (1 << c))
    }

    pub fn without(self, c: usize) -> Self {
        ColourSet(self.0 & !(1 << c))
    }

    pub fn union(self, other: ColourSet) -> Self {
        ColourSet(self.0 | other.0)
    }

    pub fn minus(self, other: ColourSet) -> Self {
        ColourSet(self.0 & !other.0)
    }

    /// Colours in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |c| bits & (1 << c) != 0)
    }
}

impl FromIterator<usize> for ColourSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(ColourSet::EMPTY, ColourSet::with)
    }
}

impl fmt::Debug for ColourSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Connected components of the subgraph spanned by a colour set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residues {
    /// Component index of every vertex.
    pub membership: Vec<u32>,
    /// Vertex count of every component.
    pub sizes: Vec<usize>,
}

impl Residues {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Vertex lists of the components, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        for (v, &m) in self.membership.iter().enumerate() {
            out[m as usize].push(v);
        }
        out
    }
}

/// An `(n+1)`-coloured regular multigraph: for every colour a fixed-point-free
/// involution of the vertex set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColouredGraph {
    colours: usize,
    order: usize,
    /// `adj[v * colours + c]` is the `c`-partner of `v`.
    adj: Vec<u32>,
}

impl ColouredGraph {
    /// Validates per-colour partner arrays (0-based) and builds the graph.
    pub fn build(
        order: usize,
        matchings: &[Vec<usize>],
        require_connected: bool,
    ) -> Result<Self, GraphError> {
        let colours = matchings.len();
        if colours == 0 || colours > MAX_COLOURS {
            return Err(GraphError::UnsupportedColours(colours));
        }
        if !order.is_multiple_of(2) {
            return Err(GraphError::OddOrder(order));
        }
        let mut adj = vec![0u32; order * colours];
        for (c, m) in matchings.iter().enumerate() {
            if m.len() != order {
                return Err(GraphError::MatchingLength {
                    colour: c,
                    len: m.len(),
                    order,
                });
            }
            for (v, &w) in m.iter().enumerate() {
                if w >= order {
                    return Err(GraphError::InvalidVertex(w));
                }
                if w == v {
                    return Err(GraphError::FixedPoint {
                        colour: c,
                        vertex: v,
                    });
                }
                if m[w] != v {
                    return Err(GraphError::NotInvolution {
                        colour: c,
                        vertex: v,
                    });
                }
                adj[v * colours + c] = w as u32;
            }
        }
        let g = ColouredGraph {
            colours,
            order,
            adj,
        };
        if require_connected && !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Builds from a flat vertex-major adjacency table without validation.
    pub(crate) fn from_raw(colours: usize, order: usize, adj: Vec<u32>) -> Self {
        debug_assert_eq!(adj.len(), colours * order);
        let g = ColouredGraph {
            colours,
            order,
            adj,
        };
        debug_assert!(g.validate().is_ok(), "{:?}", g.validate());
        g
    }

    pub(crate) fn validate(&self) -> Result<(), GraphError> {
        for v in 0..self.order {
            for c in 0..self.colours {
                let w = self.partner(v, c);
                if w >= self.order {
                    return Err(GraphError::InvalidVertex(w));
                }
                if w == v {
                    return Err(GraphError::FixedPoint {
                        colour: c,
                        vertex: v,
                    });
                }
                if self.partner(w, c) != v {
                    return Err(GraphError::NotInvolution {
                        colour: c,
                        vertex: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// The standard order-2 graph: two vertices joined by `colours` edges.
    pub fn standard(colours: usize) -> Self {
        let mut adj = Vec::with_capacity(2 * colours);
        adj.extend(std::iter::repeat_n(1, colours));
        adj.extend(std::iter::repeat_n(0, colours));
        ColouredGraph::from_raw(colours, 2, adj)
    }

    /// Number of colours `n + 1`.
    pub fn colours(&self) -> usize {
        self.colours
    }

    /// Dimension `n` of the represented pseudo-complex.
    pub fn dimension(&self) -> usize {
        self.colours - 1
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Half the order.
    pub fn p(&self) -> usize {
        self.order / 2
    }

    pub fn all_colours(&self) -> ColourSet {
        ColourSet::full(self.colours)
    }

    #[inline]
    pub fn partner(&self, v: usize, c: usize) -> usize {
        self.adj[v * self.colours + c] as usize
    }

    pub(crate) fn raw(&self) -> &[u32] {
        &self.adj
    }

    /// Partner array of one colour (0-based).
    pub fn matching(&self, c: usize) -> Vec<usize> {
        (0..self.order).map(|v| self.partner(v, c)).collect()
    }

    pub fn matchings(&self) -> Vec<Vec<usize>> {
        (0..self.colours).map(|c| self.matching(c)).collect()
    }

    /// Number of edges joining `u` and `w`.
    pub fn multiplicity(&self, u: usize, w: usize) -> usize {
        (0..self.colours).filter(|&c| self.partner(u, c) == w).count()
    }

    /// Colours of the edges joining `u` and `w`.
    pub fn joining_colours(&self, u: usize, w: usize) -> ColourSet {
        (0..self.colours)
            .filter(|&c| self.partner(u, c) == w)
            .collect()
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.order {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex(v))
        }
    }

    pub fn check_colour(&self, c: usize) -> Result<(), GraphError> {
        if c < self.colours {
            Ok(())
        } else {
            Err(GraphError::InvalidColour(c))
        }
    }

    /// Components of the subgraph using only the colours in `set`.
    pub fn residues(&self, set: ColourSet) -> Result<Residues, GraphError> {
        if set.is_empty() {
            return Err(GraphError::EmptyColourSet);
        }
        if set.iter().any(|c| c >= self.colours) {
            return Err(GraphError::InvalidColour(
                set.iter().find(|&c| c >= self.colours).unwrap(),
            ));
        }
        Ok(self.residues_unchecked(set))
    }

    pub(crate) fn residues_unchecked(&self, set: ColourSet) -> Residues {
        let cols: Vec<usize> = set.iter().collect();
        let mut membership = vec![u32::MAX; self.order];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.order {
            if membership[s] != u32::MAX {
                continue;
            }
            let id = sizes.len() as u32;
            membership[s] = id;
            stack.push(s);
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &c in &cols {
                    let w = self.partner(v, c);
                    if membership[w] == u32::MAX {
                        membership[w] = id;
                        stack.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        Residues { membership, sizes }
    }

    /// Number of residues of a colour set.
    pub fn residue_count(&self, set: ColourSet) -> usize {
        // cycles of a two-colour set are cheap to count directly
        if set.len() == 2 {
            let mut it = set.iter();
            let (a, b) = (it.next().unwrap(), it.next().unwrap());
            let mut seen = vec![false; self.order];
            let mut count = 0;
            for s in 0..self.order {
                if seen[s] {
                    continue;
                }
                count += 1;
                let mut v = s;
                loop {
                    seen[v] = true;
                    let w = self.partner(v, a);
                    seen[w] = true;
                    v = self.partner(w, b);
                    if v == s {
                        break;
                    }
                }
            }
            return count;
        }
        self.residues_unchecked(set).count()
    }

    pub fn is_connected(&self) -> bool {
        self.order == 0 || self.residue_count(self.all_colours()) == 1
    }

    /// Every `Γ_ĉ` is connected.
    pub fn is_contracted(&self) -> bool {
        (0..self.colours).all(|c| self.residue_count(self.all_colours().without(c)) == 1)
    }

    /// Two-colouring of the vertices, if one exists.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let mut side: Vec<Option<bool>> = vec![None; self.order];
        let mut stack = Vec::new();
        for s in 0..self.order {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            stack.push(s);
            while let Some(v) = stack.pop() {
                let sv = side[v].unwrap();
                for c in 0..self.colours {
                    let w = self.partner(v, c);
                    match side[w] {
                        None => {
                            side[w] = Some(!sv);
                            stack.push(w);
                        }
                        Some(sw) if sw == sv => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(side.into_iter().map(|s| s.unwrap()).collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// Applies a vertex relabelling: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GraphError> {
        if perm.len() != self.order {
            return Err(GraphError::InvalidVertex(perm.len()));
        }
        let mut seen = vec![false; self.order];
        for &x in perm {
            if x >= self.order || seen[x] {
                return Err(GraphError::InvalidVertex(x));
            }
            seen[x] = true;
        }
        let k = self.colours;
        let mut adj = vec![0u32; self.adj.len()];
        for v in 0..self.order {
            for c in 0..k {
                adj[perm[v] * k + c] = perm[self.partner(v, c)] as u32;
            }
        }
        Ok(ColouredGraph::from_raw(k, self.order, adj))
    }

    /// Renames colours: colour `c` becomes `perm[c]`.
    pub fn permute_colours(&self, perm: &[usize]) -> Result<Self, GraphError> {
        let k = self.colours;
        let mut seen = vec![false; k];
        if perm.len() != k {
            return Err(GraphError::InvalidColour(perm.len()));
        }
        for &x in perm {
            if x >= k || seen[x] {
                return Err(GraphError::InvalidColour(x));
            }
            seen[x] = true;
        }
        let mut adj = vec![0u32; self.adj.len()];
        for v in 0..self.order {
            for c in 0..k {
                adj[v * k + perm[c]] = self.adj[v * k + c];
            }
        }
        Ok(ColouredGraph::from_raw(k, self.order, adj))
    }

    /// The components of `Γ_B` as standalone graphs, colours renumbered
    /// increasingly and vertices kept in their original relative order.
    pub fn residue_graphs(&self, set: ColourSet) -> Result<Vec<ColouredGraph>, GraphError> {
        let res = self.residues(set)?;
        let cols: Vec<usize> = set.iter().collect();
        let k = cols.len();
        let comps = res.components();
        let mut local = vec![0usize; self.order];
        let mut out = Vec::with_capacity(comps.len());
        for comp in comps {
            for (i, &v) in comp.iter().enumerate() {
                local[v] = i;
            }
            let mut adj = Vec::with_capacity(comp.len() * k);
            for &v in &comp {
                for &c in &cols {
                    adj.push(local[self.partner(v, c)] as u32);
                }
            }
            out.push(ColouredGraph::from_raw(k, comp.len(), adj));
        }
        Ok(out)
    }

    /// The graph restricted to the colours of `set`, on all vertices.
    pub fn restrict(&self, set: ColourSet) -> Result<ColouredGraph, GraphError> {
        if set.is_empty() {
            return Err(GraphError::EmptyColourSet);
        }
        let cols: Vec<usize> = set.iter().collect();
        if let Some(&c) = cols.iter().find(|&&c| c >= self.colours) {
            return Err(GraphError::InvalidColour(c));
        }
        let mut adj = Vec::with_capacity(self.order * cols.len());
        for v in 0..self.order {
            for &c in &cols {
                adj.push(self.adj[v * self.colours + c]);
            }
        }
        Ok(ColouredGraph::from_raw(cols.len(), self.order, adj))
    }

    /// Graph connected sum: deletes `v1` from `self` and `v2` from `other`
    /// and joins, colour by colour, the former partners. The result has
    /// order `2(p1 + p2 - 1)`; vertices of `self` come first.
    pub fn connected_sum(
        &self,
        v1: usize,
        other: &ColouredGraph,
        v2: usize,
    ) -> Result<ColouredGraph, GraphError> {
        if other.colours != self.colours {
            return Err(GraphError::ColourCount {
                expected: self.colours,
                got: other.colours,
            });
        }
        self.check_vertex(v1)?;
        other.check_vertex(v2)?;
        let k = self.colours;
        let n1 = self.order - 1;
        let order = self.order + other.order - 2;
        let idx1 = |v: usize| if v < v1 { v } else { v - 1 };
        let idx2 = |v: usize| n1 + if v < v2 { v } else { v - 1 };
        let mut adj = vec![0u32; order * k];
        for v in (0..self.order).filter(|&v| v != v1) {
            for c in 0..k {
                let w = self.partner(v, c);
                let t = if w == v1 {
                    idx2(other.partner(v2, c))
                } else {
                    idx1(w)
                };
                adj[idx1(v) * k + c] = t as u32;
            }
        }
        for v in (0..other.order).filter(|&v| v != v2) {
            for c in 0..k {
                let w = other.partner(v, c);
                let t = if w == v2 {
                    idx1(self.partner(v1, c))
                } else {
                    idx2(w)
                };
                adj[idx2(v) * k + c] = t as u32;
            }
        }
        Ok(ColouredGraph::from_raw(k, order, adj))
    }

    /// Serializes to the gem text format: header `colours order`, then one
    /// line of 1-based partners per colour.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.colours, self.order);
        for c in 0..self.colours {
            let line: Vec<String> = (0..self.order)
                .map(|v| (self.partner(v, c) + 1).to_string())
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for ColouredGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ColouredGraph({} colours, order {}) [", self.colours, self.order)?;
        for c in 0..self.colours {
            if c > 0 {
                write!(f, " |")?;
            }
            for v in 0..self.order {
                write!(f, " {}", self.partner(v, c) + 1)?;
            }
        }
        write!(f, " ]")
    }
}

/// Residue counts `g_B` for every colour subset with at least two colours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueCensus {
    colours: usize,
    order: usize,
    /// Indexed by colour-set bitmask.
    residues: Vec<Option<Residues>>,
}

impl ResidueCensus {
    pub fn new(g: &ColouredGraph) -> Self {
        let k = g.colours();
        let mut residues = vec![None; 1 << k];
        for bits in 0u32..(1 << k) {
            if bits.count_ones() >= 2 {
                residues[bits as usize] = Some(g.residues_unchecked(ColourSet(bits)));
            }
        }
        ResidueCensus {
            colours: k,
            order: g.order(),
            residues,
        }
    }

    pub fn colours(&self) -> usize {
        self.colours
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn p(&self) -> usize {
        self.order / 2
    }

    /// `g_B`; panics if `B` has fewer than two colours.
    pub fn g(&self, set: ColourSet) -> usize {
        self.residues[set.bits() as usize]
            .as_ref()
            .expect("census covers sets of at least two colours")
            .count()
    }

    pub fn g2(&self, i: usize, j: usize) -> usize {
        self.g(ColourSet::single(i).with(j))
    }

    pub fn g3(&self, i: usize, j: usize, k: usize) -> usize {
        self.g(ColourSet::single(i).with(j).with(k))
    }

    /// `g_ĉ`.
    pub fn g_hat(&self, c: usize) -> usize {
        self.g(ColourSet::full(self.colours).without(c))
    }

    pub fn residues(&self, set: ColourSet) -> Option<&Residues> {
        self.residues[set.bits() as usize].as_ref()
    }

    /// Total number of residues over all sets of size `h`.
    pub fn total(&self, h: usize) -> usize {
        (0u32..(1 << self.colours))
            .filter(|b| b.count_ones() as usize == h)
            .map(|b| self.g(ColourSet(b)))
            .sum()
    }

    /// Iterates `(B, g_B)` over all covered sets in bitmask order.
    pub fn iter(&self) -> impl Iterator<Item = (ColourSet, usize)> + '_ {
        self.residues
            .iter()
            .enumerate()
            .filter_map(|(b, r)| r.as_ref().map(|r| (ColourSet(b as u32), r.count())))
    }
}

pub fn census(g: &ColouredGraph) -> ResidueCensus {
    ResidueCensus::new(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap_graph(order: usize, colours: usize, pairs: &[&[(usize, usize)]]) -> Vec<Vec<usize>> {
        assert_eq!(pairs.len(), colours);
        pairs
            .iter()
            .map(|ps| {
                let mut m = vec![usize::MAX; order];
                for &(a, b) in ps.iter() {
                    m[a] = b;
                    m[b] = a;
                }
                m
            })
            .collect()
    }

    #[test]
    fn standard_graph() {
        let m = vec![vec![1, 0]; 5];
        let g = ColouredGraph::build(2, &m, true).unwrap();
        assert_eq!(g, ColouredGraph::standard(5));
        assert!(g.is_bipartite());
        assert!(g.is_contracted());
        let c = census(&g);
        for i in 0..5 {
            for j in i + 1..5 {
                assert_eq!(c.g2(i, j), 1);
                for k in j + 1..5 {
                    assert_eq!(c.g3(i, j, k), 1);
                }
            }
        }
        assert_eq!(c.total(2), 10);
        assert_eq!(c.total(3), 10);
    }

    #[test]
    fn build_errors() {
        let mut m = vec![vec![1, 0]; 5];
        m[2] = vec![0, 1];
        assert!(matches!(
            ColouredGraph::build(2, &m, true),
            Err(GraphError::FixedPoint { colour: 2, .. })
        ));
        assert_eq!(
            ColouredGraph::build(3, &[vec![1, 0, 2]], false),
            Err(GraphError::OddOrder(3))
        );
        let bad = vec![vec![1, 2, 3, 0]];
        assert!(matches!(
            ColouredGraph::build(4, &bad, false),
            Err(GraphError::NotInvolution { .. })
        ));
        let pairs: &[(usize, usize)] = &[(0, 1), (2, 3)];
        let m = swap_graph(4, 5, &[pairs; 5]);
        assert_eq!(
            ColouredGraph::build(4, &m, true),
            Err(GraphError::Disconnected)
        );
        assert!(ColouredGraph::build(4, &m, false).is_ok());
    }

    #[test]
    fn residues_of_standard() {
        let g = ColouredGraph::standard(5);
        let r = g.residues(ColourSet::from_iter([0, 1])).unwrap();
        assert_eq!(r.sizes, vec![2]);
        let r = g.residues(ColourSet::full(5).without(4)).unwrap();
        assert_eq!(r.count(), 1);
        assert_eq!(
            g.residues(ColourSet::EMPTY),
            Err(GraphError::EmptyColourSet)
        );
    }

    #[test]
    fn connected_sum_order() {
        let g = ColouredGraph::standard(5);
        let s = g.connected_sum(0, &g, 1).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s, g);
        assert!(g.connected_sum(2, &g, 0).is_err());
    }

    #[test]
    fn colour_set_ops() {
        let s = ColourSet::full(5).without(2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 1, 3, 4]);
        assert_eq!(s.len(), 4);
        assert!(!s.contains(2));
        assert_eq!(format!("{:?}", ColourSet::from_iter([1, 3])), "{1, 3}");
    }

    #[test]
    fn text_round_trip() {
        let g = ColouredGraph::standard(5);
        assert_eq!(g.to_text(), "5 2\n2 1\n2 1\n2 1\n2 1\n2 1\n");
    }
}
