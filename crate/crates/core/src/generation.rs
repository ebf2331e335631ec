//! Exhaustive generation of 3-sphere gems without ρ₃-pairs and of the
//! catalogues of rigid dipole-free crystallizations of closed 4-manifolds.
//!
//! Both generators complete a matching colour by colour, depth-first, always
//! pairing the lowest uncovered vertex. Partial graphs are pruned as soon as
//! some residue made of two complete colours and the partial one can no
//! longer close up into 2-spheres, or a vertex pair carries three edges.
//! Isomorphic duplicates are removed by canonical code at the end.

use std::collections::{BTreeSet, HashSet};

use log::{debug, info, warn};
use rayon::prelude::*;
use thiserror::Error;

use crate::code::{code, fixed_colour_code, permutations, Code, CodeError};
use crate::graph::{ColouredGraph, GraphError};
use crate::moves::{all_dipoles, rho_pairs_at_least};
use crate::topology::{is_manifold_crystallization, recognize_s3, S3_RECOGNITION_MAX_ORDER};

const NONE: u32 = u32::MAX;

/// Largest order accepted by the generators; beyond it the 3-sphere
/// recognition used as a filter is no longer known to be complete.
pub const MAX_GENERATION_ORDER: usize = S3_RECOGNITION_MAX_ORDER;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerationError {
    #[error("order {0} is not supported (must be even, between 2 and {MAX_GENERATION_ORDER})")]
    UnsupportedOrder(usize),
    #[error("partial graph has no boundary vertices")]
    NoBoundary,
    #[error("seed has {got} colours, expected {expected}")]
    SeedColours { expected: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// A coloured graph whose last colour is only partially matched.
#[derive(Clone, PartialEq, Eq)]
pub struct PartialGraph {
    colours: usize,
    order: usize,
    adj: Vec<u32>,
    covered: usize,
}

impl PartialGraph {
    /// Extends a complete graph by one new, still empty colour.
    pub fn new(base: &ColouredGraph) -> Self {
        let k = base.colours();
        let n = base.order();
        let mut adj = Vec::with_capacity(n * (k + 1));
        for v in 0..n {
            adj.extend((0..k).map(|c| base.partner(v, c) as u32));
            adj.push(NONE);
        }
        PartialGraph {
            colours: k + 1,
            order: n,
            adj,
            covered: 0,
        }
    }

    pub fn colours(&self) -> usize {
        self.colours
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The colour being completed.
    pub fn partial_colour(&self) -> usize {
        self.colours - 1
    }

    /// Number of vertices already matched in the partial colour.
    pub fn covered(&self) -> usize {
        self.covered
    }

    pub fn is_complete(&self) -> bool {
        self.covered == self.order
    }

    pub fn partner(&self, v: usize, c: usize) -> Option<usize> {
        let w = self.adj[v * self.colours + c];
        (w != NONE).then_some(w as usize)
    }

    #[inline]
    fn raw(&self, v: usize, c: usize) -> u32 {
        self.adj[v * self.colours + c]
    }

    /// Adds an edge of the partial colour between two uncovered vertices.
    pub fn join(&mut self, u: usize, w: usize) -> Result<(), GraphError> {
        let x = self.partial_colour();
        for v in [u, w] {
            if v >= self.order {
                return Err(GraphError::InvalidVertex(v));
            }
        }
        if u == w {
            return Err(GraphError::FixedPoint { colour: x, vertex: u });
        }
        if self.raw(u, x) != NONE || self.raw(w, x) != NONE {
            return Err(GraphError::NotInvolution { colour: x, vertex: u });
        }
        self.set(u, w);
        Ok(())
    }

    fn set(&mut self, u: usize, w: usize) {
        let k = self.colours;
        self.adj[u * k + k - 1] = w as u32;
        self.adj[w * k + k - 1] = u as u32;
        self.covered += 2;
    }

    fn unset(&mut self, u: usize, w: usize) {
        let k = self.colours;
        self.adj[u * k + k - 1] = NONE;
        self.adj[w * k + k - 1] = NONE;
        self.covered -= 2;
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        let x = self.partial_colour();
        (0..self.order).filter(|&v| self.raw(v, x) == NONE).collect()
    }

    fn multiplicity(&self, u: usize, w: usize) -> usize {
        (0..self.colours).filter(|&c| self.raw(u, c) == w as u32).count()
    }

    /// The completed graph, if the partial colour is a perfect matching.
    pub fn to_graph(&self) -> Option<ColouredGraph> {
        self.is_complete()
            .then(|| ColouredGraph::from_raw(self.colours, self.order, self.adj.clone()))
    }
}

impl std::fmt::Debug for PartialGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "PartialGraph({} colours, order {}, {} covered)",
            self.colours, self.order, self.covered
        )
    }
}

/// The graph on the boundary vertices of a partial graph in which two
/// vertices are `c`-adjacent iff they are the ends of a path alternating
/// colour `c` and the partial colour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryGraph {
    /// `vertices[i]` is the vertex of the partial graph behind vertex `i`.
    pub vertices: Vec<usize>,
    pub graph: ColouredGraph,
}

/// Far end of the path leaving `v` by colour `c` and then alternating the
/// partial colour `x` and `c`.
#[inline]
fn path_end(pg: &PartialGraph, v: usize, c: usize, x: usize) -> usize {
    let mut cur = pg.raw(v, c) as usize;
    loop {
        let next = pg.raw(cur, x);
        if next == NONE {
            return cur;
        }
        cur = pg.raw(next as usize, c) as usize;
    }
}

pub fn boundary_graph(pg: &PartialGraph) -> Result<BoundaryGraph, GenerationError> {
    let vertices = pg.boundary_vertices();
    if vertices.is_empty() {
        return Err(GenerationError::NoBoundary);
    }
    let x = pg.partial_colour();
    let mut index = vec![usize::MAX; pg.order()];
    for (i, &v) in vertices.iter().enumerate() {
        index[v] = i;
    }
    let matchings: Vec<Vec<usize>> = (0..x)
        .map(|c| vertices.iter().map(|&v| index[path_end(pg, v, c, x)]).collect())
        .collect();
    let graph = ColouredGraph::build(vertices.len(), &matchings, false)?;
    Ok(BoundaryGraph { vertices, graph })
}

/// Scratch space for [`planar_residue`].
#[derive(Default)]
struct Scratch {
    mark: Vec<u32>,
    stack: Vec<u32>,
    ends_a: Vec<u32>,
    ends_b: Vec<u32>,
}

/// Whether every component of the residue with complete colours `a`, `b`
/// and the partial colour is a sphere with holes.
///
/// For a component with `V` vertices, `E` edges, `F` closed bicoloured
/// cycles and `H` boundary circles, genus zero means `V - E + F = 2 - H`.
/// Boundary circles are the `{a, b}`-cycles of the boundary graph. Since
/// every component has non-negative genus, it suffices to check the sum.
fn planar_residue(pg: &PartialGraph, a: usize, b: usize, s: &mut Scratch) -> bool {
    let n = pg.order;
    let x = pg.partial_colour();
    s.mark.clear();
    s.mark.resize(n, 0);
    // components of the residue
    let mut components = 0i64;
    for start in 0..n {
        if s.mark[start] != 0 {
            continue;
        }
        components += 1;
        s.mark[start] = 1;
        s.stack.clear();
        s.stack.push(start as u32);
        while let Some(v) = s.stack.pop() {
            for c in [a, b, x] {
                let w = pg.raw(v as usize, c);
                if w != NONE && s.mark[w as usize] == 0 {
                    s.mark[w as usize] = 1;
                    s.stack.push(w);
                }
            }
        }
    }
    let vertices = n as i64;
    let edges = n as i64 + pg.covered as i64 / 2;
    // closed {a, b}-cycles
    let mut faces = 0i64;
    s.mark.iter_mut().for_each(|m| *m = 0);
    for start in 0..n {
        if s.mark[start] != 0 {
            continue;
        }
        faces += 1;
        let mut v = start;
        loop {
            s.mark[v] = 1;
            let w = pg.raw(v, a) as usize;
            s.mark[w] = 1;
            v = pg.raw(w, b) as usize;
            if v == start {
                break;
            }
        }
    }
    // closed {a, x}- and {b, x}-cycles; paths end on boundary vertices
    for c in [a, b] {
        s.mark.iter_mut().for_each(|m| *m = 0);
        for start in 0..n {
            if s.mark[start] != 0 || pg.raw(start, x) == NONE {
                continue;
            }
            let mut v = start;
            let mut closed = true;
            loop {
                s.mark[v] = 1;
                let w = pg.raw(v, c) as usize;
                s.mark[w] = 1;
                let next = pg.raw(w, x);
                if next == NONE {
                    closed = false;
                    break;
                }
                v = next as usize;
                if v == start {
                    break;
                }
            }
            if closed {
                faces += 1;
            }
            // walk the other way too so the whole path gets marked
            if !closed {
                let mut v = pg.raw(start, x) as usize;
                loop {
                    s.mark[v] = 1;
                    let w = pg.raw(v, c) as usize;
                    s.mark[w] = 1;
                    let next = pg.raw(w, x);
                    if next == NONE {
                        break;
                    }
                    v = next as usize;
                }
            }
        }
    }
    // boundary circles
    let mut circles = 0i64;
    if pg.covered < n {
        s.ends_a.clear();
        s.ends_a.resize(n, NONE);
        s.ends_b.clear();
        s.ends_b.resize(n, NONE);
        for v in 0..n {
            if pg.raw(v, x) == NONE {
                s.ends_a[v] = path_end(pg, v, a, x) as u32;
                s.ends_b[v] = path_end(pg, v, b, x) as u32;
            }
        }
        s.mark.iter_mut().for_each(|m| *m = 0);
        for start in 0..n {
            if pg.raw(start, x) != NONE || s.mark[start] != 0 {
                continue;
            }
            circles += 1;
            let mut v = start;
            loop {
                s.mark[v] = 1;
                let w = s.ends_a[v] as usize;
                s.mark[w] = 1;
                v = s.ends_b[w] as usize;
                if v == start {
                    break;
                }
            }
        }
    }
    vertices - edges + faces == 2 * components - circles
}

fn planar_all(pg: &PartialGraph, s: &mut Scratch) -> bool {
    let x = pg.partial_colour();
    for a in 0..x {
        for b in a + 1..x {
            if !planar_residue(pg, a, b, s) {
                return false;
            }
        }
    }
    true
}

/// Pruning test for a partial graph: no vertex pair joined by three or more
/// edges, and every residue formed by two complete colours and the partial
/// colour is a union of spheres with holes (the only way it can close up
/// into 2-spheres).
pub fn check_extension(pg: &PartialGraph) -> bool {
    let x = pg.partial_colour();
    for v in 0..pg.order {
        if let Some(w) = pg.partner(v, x) {
            if pg.order > 2 && pg.multiplicity(v, w) >= 3 {
                return false;
            }
        }
    }
    planar_all(pg, &mut Scratch::default())
}

/// Depth-first completion of the partial colour: the lowest uncovered vertex
/// is paired with each higher uncovered vertex in turn.
fn extend<F: FnMut(&PartialGraph)>(
    pg: &mut PartialGraph,
    prune: bool,
    s: &mut Scratch,
    leaf: &mut F,
) {
    let x = pg.partial_colour();
    let Some(u) = (0..pg.order).find(|&v| pg.raw(v, x) == NONE) else {
        leaf(pg);
        return;
    };
    for w in u + 1..pg.order {
        if pg.raw(w, x) != NONE {
            continue;
        }
        pg.set(u, w);
        // the two-vertex graphs are the only ones allowed parallel triples
        let ok = !prune || ((pg.order == 2 || pg.multiplicity(u, w) < 3) && planar_all(pg, s));
        if ok {
            extend(pg, prune, s, leaf);
        }
        pg.unset(u, w);
    }
}

fn check_order(order: usize) -> Result<(), GenerationError> {
    if order < 2 || !order.is_multiple_of(2) || order > MAX_GENERATION_ORDER {
        return Err(GenerationError::UnsupportedOrder(order));
    }
    Ok(())
}

/// Partitions of `p` into parts in non-increasing order.
fn partitions(p: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            go(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(p, p, &mut Vec::new(), &mut out);
    out
}

/// The two-coloured graph whose bicoloured cycles have the given half
/// lengths: colour 0 is `(0 1)(2 3)...`, colour 1 closes each run of
/// consecutive colour-0 edges into a cycle.
fn two_coloured(parts: &[usize]) -> ColouredGraph {
    let n = 2 * parts.iter().sum::<usize>();
    let mut adj = vec![0u32; 2 * n];
    let mut first = 0;
    for &m in parts {
        for i in 0..m {
            let a = first + 2 * i;
            adj[a * 2] = (a + 1) as u32;
            adj[(a + 1) * 2] = a as u32;
            let b = a + 1;
            let c = first + 2 * ((i + 1) % m);
            adj[b * 2 + 1] = c as u32;
            adj[c * 2 + 1] = b as u32;
        }
        first += 2 * m;
    }
    ColouredGraph::from_raw(2, n, adj)
}

/// Key of a possibly disconnected graph up to vertex relabelling and the
/// given colour permutations: the least sorted list of component codes.
fn disconnected_key(g: &ColouredGraph, colour_perms: &[Vec<usize>]) -> Vec<Code> {
    colour_perms
        .iter()
        .map(|perm| {
            let h = g.permute_colours(perm).expect("valid permutation");
            let mut codes: Vec<Code> = h
                .residue_graphs(h.all_colours())
                .expect("non-empty colour set")
                .iter()
                .map(|c| fixed_colour_code(c).expect("components are connected"))
                .collect();
            codes.sort();
            codes
        })
        .min()
        .expect("at least one permutation")
}

/// Rebuilds a graph from the component codes of its key.
fn from_key(key: &[Code]) -> ColouredGraph {
    let k = key[0].colours();
    let n: usize = key.iter().map(Code::order).sum();
    let mut adj = Vec::with_capacity(k * n);
    let mut offset = 0u32;
    for c in key {
        let g = c.to_graph();
        adj.extend(g.raw().iter().map(|&w| w + offset));
        offset += g.order() as u32;
    }
    ColouredGraph::from_raw(k, n, adj)
}

/// All three-coloured graphs of the given order, up to isomorphism and
/// colour renaming, whose components are 2-spheres and which have no vertex
/// pair joined by all three colours (unless the order is 2).
fn spherical_three_coloured(order: usize) -> Vec<ColouredGraph> {
    let p = order / 2;
    let perms = permutations(3);
    let keys: BTreeSet<Vec<Code>> = partitions(p)
        .par_iter()
        .map(|parts| {
            let base = two_coloured(parts);
            let mut pg = PartialGraph::new(&base);
            let mut found = BTreeSet::new();
            let mut s = Scratch::default();
            extend(&mut pg, true, &mut s, &mut |leaf: &PartialGraph| {
                let g = leaf.to_graph().expect("complete");
                found.insert(disconnected_key(&g, &perms));
            });
            found
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    keys.iter().map(|k| from_key(k)).collect()
}

/// Connected four-coloured graphs of the given order whose 3-residues are
/// all 2-spheres and which have no ρ₃-pairs, one per isomorphism class,
/// before 3-sphere recognition.
fn s3_candidates(order: usize) -> Vec<ColouredGraph> {
    let bases = spherical_three_coloured(order);
    debug!("order {order}: {} three-coloured bases", bases.len());
    let codes: BTreeSet<Code> = bases
        .par_iter()
        .map(|base| {
            let mut pg = PartialGraph::new(base);
            let mut found = BTreeSet::new();
            let mut s = Scratch::default();
            extend(&mut pg, true, &mut s, &mut |leaf: &PartialGraph| {
                let g = leaf.to_graph().expect("complete");
                if g.is_connected() && rho_pairs_at_least(&g, 3).is_empty() {
                    found.insert(code(&g).expect("connected"));
                }
            });
            found
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    codes.iter().map(Code::to_graph).collect()
}

fn is_s3(g: &ColouredGraph) -> bool {
    match recognize_s3(g) {
        Ok(b) => b,
        Err(e) => {
            warn!("3-sphere recognition failed on {}: {e}", g.to_text());
            false
        }
    }
}

/// The set `S^(order)`: connected gems of the 3-sphere with no ρ₃-pairs,
/// one per colour-isomorphism class, sorted by code.
pub fn generate_s3(order: usize) -> Result<Vec<Code>, GenerationError> {
    check_order(order)?;
    if order == 2 {
        return Ok(vec![code(&ColouredGraph::standard(4))?]);
    }
    let candidates = s3_candidates(order);
    let mut out: Vec<Code> = candidates
        .par_iter()
        .filter(|g| is_s3(g))
        .map(|g| code(g).expect("connected"))
        .collect();
    out.sort();
    info!("order {order}: {} gems of the 3-sphere", out.len());
    Ok(out)
}

/// Rigid dipole-free crystallizations of 4-manifolds, split by
/// bipartiteness; both lists sorted by code.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalogue {
    pub bipartite: Vec<Code>,
    pub nonbipartite: Vec<Code>,
}

impl Catalogue {
    pub fn from_codes(codes: impl IntoIterator<Item = Code>) -> Self {
        let all: BTreeSet<Code> = codes.into_iter().collect();
        let (bipartite, nonbipartite) = all
            .into_iter()
            .partition(|c| c.to_graph().is_bipartite());
        Catalogue {
            bipartite,
            nonbipartite,
        }
    }

    pub fn len(&self) -> usize {
        self.bipartite.len() + self.nonbipartite.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Cheap part of the membership test: contracted, no dipoles, no vertex
/// pair with three or more edges, no ρ₃- or ρ₄-pairs.
fn combinatorial_filters(g: &ColouredGraph) -> bool {
    if g.order() == 2 {
        return true;
    }
    if !g.is_contracted() {
        return false;
    }
    for u in 0..g.order() {
        for c in 0..g.colours() {
            if g.multiplicity(u, g.partner(u, c)) >= 3 {
                return false;
            }
        }
    }
    all_dipoles(g).is_empty() && rho_pairs_at_least(g, 3).is_empty()
}

/// Whether a five-coloured graph belongs to a catalogue: a rigid
/// dipole-free crystallization of a closed 4-manifold.
pub fn is_catalogue_member(g: &ColouredGraph) -> bool {
    g.colours() == 5
        && combinatorial_filters(g)
        && g.residues(g.all_colours().without(0))
            .map(|r| r.sizes.iter().all(|&s| s <= S3_RECOGNITION_MAX_ORDER))
            .unwrap_or(false)
        && is_manifold_crystallization(g).unwrap_or(false)
}

/// All catalogue members obtained by adding a colour-4 matching to one seed.
/// With `prune` off every perfect matching is tried (a brute-force oracle).
pub fn extend_seed(seed: &ColouredGraph, prune: bool) -> Result<BTreeSet<Code>, GenerationError> {
    if seed.colours() != 4 {
        return Err(GenerationError::SeedColours {
            expected: 4,
            got: seed.colours(),
        });
    }
    check_order(seed.order())?;
    let mut pg = PartialGraph::new(seed);
    let mut candidates = HashSet::new();
    let mut s = Scratch::default();
    extend(&mut pg, prune, &mut s, &mut |leaf: &PartialGraph| {
        let g = leaf.to_graph().expect("complete");
        if combinatorial_filters(&g) {
            candidates.insert(code(&g).expect("contracted graphs are connected"));
        }
    });
    let kept: BTreeSet<Code> = candidates
        .into_iter()
        .filter(|c| is_manifold_crystallization(&c.to_graph()).unwrap_or(false))
        .collect();
    Ok(kept)
}

/// Extends every seed (in parallel) and merges the results.
pub fn catalogue_from_seeds(seeds: &[Code], prune: bool) -> Result<Catalogue, GenerationError> {
    let sets: Vec<BTreeSet<Code>> = seeds
        .par_iter()
        .map(|c| extend_seed(&c.to_graph(), prune))
        .collect::<Result<_, _>>()?;
    Ok(Catalogue::from_codes(sets.into_iter().flatten()))
}

/// The catalogues of the given order: seeds from [`generate_s3`], extended
/// with pruning.
pub fn generate_catalogue(order: usize) -> Result<Catalogue, GenerationError> {
    let seeds = generate_s3(order)?;
    info!("order {order}: extending {} seeds", seeds.len());
    let cat = catalogue_from_seeds(&seeds, true)?;
    info!(
        "order {order}: {} bipartite, {} non-bipartite",
        cat.bipartite.len(),
        cat.nonbipartite.len()
    );
    Ok(cat)
}
