//! Moves on coloured graphs: dipoles, ρ-pair switching, blobs and flips,
//! and the reduction of a gem to a rigid dipole-free crystallization.

use log::{debug, warn};
use thiserror::Error;

use crate::graph::{ColourSet, ColouredGraph, GraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("not a dipole: {0}")]
    NotADipole(String),
    #[error("dipole elimination would create a loop")]
    WouldCreateLoop,
    #[error("edges share a vertex")]
    SharedVertex,
    #[error("switch would create a loop")]
    LoopCreated,
    #[error("({0}, {1}) is not an edge of colour {2}")]
    NotAnEdge(usize, usize, usize),
    #[error("not a ρ-pair of an admissible type")]
    NotRhoPair,
    #[error("no admissible pairing for the switch")]
    NoAdmissiblePairing,
    #[error("not a flip configuration: {0}")]
    NotAFlipConfiguration(String),
    #[error("graph is not contracted but has no 1-dipole")]
    StuckNotContracted,
    #[error("ρ-pair switch created no dipole")]
    NoDipoleAfterSwitch,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Two vertices joined by exactly the edges coloured by `colours` and lying
/// in distinct residues of the complementary colours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dipole {
    pub u: usize,
    pub w: usize,
    pub colours: ColourSet,
}

impl Dipole {
    pub fn h(&self) -> usize {
        self.colours.len()
    }
}

/// An edge given by its endpoints and colour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub colour: usize,
}

impl Edge {
    /// The `colour`-edge at `v`.
    pub fn at(g: &ColouredGraph, v: usize, colour: usize) -> Edge {
        let w = g.partner(v, colour);
        Edge {
            a: v.min(w),
            b: v.max(w),
            colour,
        }
    }

    fn oriented(g: &ColouredGraph, v: usize, colour: usize) -> Edge {
        Edge {
            a: v,
            b: g.partner(v, colour),
            colour,
        }
    }

    fn check(&self, g: &ColouredGraph) -> Result<(), MoveError> {
        g.check_vertex(self.a)?;
        g.check_vertex(self.b)?;
        g.check_colour(self.colour)?;
        if g.partner(self.a, self.colour) != self.b {
            return Err(MoveError::NotAnEdge(self.a, self.b, self.colour));
        }
        Ok(())
    }

    fn touches(&self, v: usize) -> bool {
        self.a == v || self.b == v
    }
}

/// Two equally coloured edges lying in exactly `shared.len()` common
/// bicoloured cycles; `shared` lists the second colour of each such cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RhoPair {
    pub colour: usize,
    pub e: Edge,
    pub f: Edge,
    pub shared: ColourSet,
}

impl RhoPair {
    pub fn s(&self) -> usize {
        self.shared.len()
    }
}

/// How the four endpoints of two switched edges `(a, b)`, `(x, y)` are rejoined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// `{a, x}`, `{b, y}`
    Straight,
    /// `{a, y}`, `{b, x}`
    Crossed,
}

impl Pairing {
    pub fn other(self) -> Pairing {
        match self {
            Pairing::Straight => Pairing::Crossed,
            Pairing::Crossed => Pairing::Straight,
        }
    }
}

struct Editor {
    k: usize,
    n: usize,
    adj: Vec<u32>,
}

impl Editor {
    fn new(g: &ColouredGraph) -> Self {
        Editor {
            k: g.colours(),
            n: g.order(),
            adj: g.raw().to_vec(),
        }
    }

    fn join(&mut self, u: usize, w: usize, c: usize) {
        self.adj[u * self.k + c] = w as u32;
        self.adj[w * self.k + c] = u as u32;
    }

    fn add_vertices(&mut self, count: usize) -> usize {
        let first = self.n;
        self.n += count;
        self.adj.resize(self.n * self.k, u32::MAX);
        first
    }

    fn finish(self) -> ColouredGraph {
        ColouredGraph::from_raw(self.k, self.n, self.adj)
    }

    /// Deletes two vertices, keeping the relative order of the others.
    fn finish_without(self, u: usize, w: usize) -> ColouredGraph {
        let k = self.k;
        let shift = |v: usize| v - (v > u) as usize - (v > w) as usize;
        let mut adj = Vec::with_capacity((self.n - 2) * k);
        for v in (0..self.n).filter(|&v| v != u && v != w) {
            for c in 0..k {
                adj.push(shift(self.adj[v * k + c] as usize) as u32);
            }
        }
        ColouredGraph::from_raw(k, self.n - 2, adj)
    }
}

/// Checks whether `u`, `w` form a dipole and returns it.
pub fn dipole_at(g: &ColouredGraph, u: usize, w: usize) -> Option<Dipole> {
    if u == w || u >= g.order() || w >= g.order() {
        return None;
    }
    let colours = g.joining_colours(u, w);
    let rest = g.all_colours().minus(colours);
    if colours.is_empty() || rest.is_empty() {
        return None;
    }
    let res = g.residues_unchecked(rest);
    (res.membership[u] != res.membership[w]).then_some(Dipole {
        u: u.min(w),
        w: u.max(w),
        colours,
    })
}

/// All dipoles, ordered by decreasing `h`, then lower vertex, then colour set.
pub fn all_dipoles(g: &ColouredGraph) -> Vec<Dipole> {
    let k = g.colours();
    let full = g.all_colours();
    let mut cache: Vec<Option<Vec<u32>>> = vec![None; 1 << k];
    let mut out = Vec::new();
    for u in 0..g.order() {
        for c in 0..k {
            let w = g.partner(u, c);
            if w < u {
                continue;
            }
            let colours = g.joining_colours(u, w);
            // visit each adjacent pair once, through its least colour
            if colours.iter().next() != Some(c) {
                continue;
            }
            let rest = full.minus(colours);
            if rest.is_empty() {
                continue;
            }
            let memb = cache[rest.bits() as usize]
                .get_or_insert_with(|| g.residues_unchecked(rest).membership);
            if memb[u] != memb[w] {
                out.push(Dipole { u, w, colours });
            }
        }
    }
    out.sort_by(|a, b| {
        b.h()
            .cmp(&a.h())
            .then(a.u.cmp(&b.u))
            .then(a.colours.iter().cmp(b.colours.iter()))
    });
    out
}

/// Dipoles with exactly `h` parallel edges.
pub fn find_dipoles(g: &ColouredGraph, h: usize) -> Vec<Dipole> {
    all_dipoles(g).into_iter().filter(|d| d.h() == h).collect()
}

/// Cancels a dipole: deletes `u`, `w` and joins their partners in every
/// colour outside the dipole. Remaining vertices keep their relative order.
pub fn eliminate_dipole(g: &ColouredGraph, d: &Dipole) -> Result<ColouredGraph, MoveError> {
    let Some(found) = dipole_at(g, d.u, d.w) else {
        return Err(MoveError::NotADipole(format!("({}, {})", d.u, d.w)));
    };
    if found.colours != d.colours {
        return Err(MoveError::NotADipole(format!(
            "({}, {}) joined by {:?}, not {:?}",
            d.u, d.w, found.colours, d.colours
        )));
    }
    let mut ed = Editor::new(g);
    for c in g.all_colours().minus(d.colours).iter() {
        let a = g.partner(d.u, c);
        let b = g.partner(d.w, c);
        if a == b {
            return Err(MoveError::WouldCreateLoop);
        }
        ed.join(a, b, c);
    }
    Ok(ed.finish_without(d.u, d.w))
}

/// Inserts an `h`-dipole with colour set `colours` next to `v`: a new vertex
/// `u1` takes over the edges of `v` coloured outside `colours`, a second new
/// vertex `u2` takes over their far ends, and `u1`, `u2` are joined by
/// `colours`. The new vertices get indices `order` and `order + 1`.
pub fn insert_dipole(
    g: &ColouredGraph,
    v: usize,
    colours: ColourSet,
) -> Result<(ColouredGraph, Dipole), MoveError> {
    g.check_vertex(v)?;
    let full = g.all_colours();
    if colours.is_empty() || colours.minus(full) != ColourSet::EMPTY || colours == full {
        return Err(MoveError::NotADipole(format!("colour set {colours:?}")));
    }
    let mut ed = Editor::new(g);
    let u1 = ed.add_vertices(2);
    let u2 = u1 + 1;
    for c in 0..g.colours() {
        if colours.contains(c) {
            ed.join(u1, u2, c);
        } else {
            let w = g.partner(v, c);
            ed.join(v, u1, c);
            ed.join(u2, w, c);
        }
    }
    Ok((
        ed.finish(),
        Dipole {
            u: u1,
            w: u2,
            colours,
        },
    ))
}

/// Inserts a blob (an `n`-dipole) on the `c`-edge at `v`.
pub fn insert_blob(
    g: &ColouredGraph,
    v: usize,
    c: usize,
) -> Result<(ColouredGraph, Dipole), MoveError> {
    g.check_vertex(v)?;
    g.check_colour(c)?;
    insert_dipole(g, v, g.all_colours().without(c))
}

/// Identifier of the `{c, j}`-cycle through every vertex.
fn bicoloured_cycle_ids(g: &ColouredGraph, c: usize, j: usize) -> Vec<u32> {
    let mut id = vec![u32::MAX; g.order()];
    let mut next = 0;
    for s in 0..g.order() {
        if id[s] != u32::MAX {
            continue;
        }
        let mut v = s;
        loop {
            id[v] = next;
            let w = g.partner(v, c);
            id[w] = next;
            v = g.partner(w, j);
            if v == s {
                break;
            }
        }
        next += 1;
    }
    id
}

/// ρ-pairs of every size `s >= min_shared`, sorted by colour, then edges.
pub fn rho_pairs_at_least(g: &ColouredGraph, min_shared: usize) -> Vec<RhoPair> {
    let k = g.colours();
    let mut out = Vec::new();
    for c in 0..k {
        let ids: Vec<(usize, Vec<u32>)> = (0..k)
            .filter(|&j| j != c)
            .map(|j| (j, bicoloured_cycle_ids(g, c, j)))
            .collect();
        let edges: Vec<usize> = (0..g.order()).filter(|&v| g.partner(v, c) > v).collect();
        for (i, &a) in edges.iter().enumerate() {
            for &x in &edges[i + 1..] {
                let mut shared = ColourSet::EMPTY;
                for (j, id) in &ids {
                    if id[a] == id[x] {
                        shared = shared.with(*j);
                    }
                }
                if shared.len() >= min_shared && !shared.is_empty() {
                    out.push(RhoPair {
                        colour: c,
                        e: Edge::at(g, a, c),
                        f: Edge::at(g, x, c),
                        shared,
                    });
                }
            }
        }
    }
    out
}

/// ρ-pairs with exactly `s` common bicoloured cycles (`s >= 1`).
pub fn find_rho_pairs(g: &ColouredGraph, s: usize) -> Vec<RhoPair> {
    rho_pairs_at_least(g, s.max(1))
        .into_iter()
        .filter(|r| r.s() == s)
        .collect()
}

/// No ρ-pairs with `s` in `{n-1, n}`.
pub fn is_rigid(g: &ColouredGraph) -> bool {
    let n = g.dimension();
    rho_pairs_at_least(g, n.saturating_sub(1).max(1)).is_empty()
}

/// Exchanges the endpoints of two vertex-disjoint edges of equal colour.
pub fn switch_edges(
    g: &ColouredGraph,
    e: Edge,
    f: Edge,
    pairing: Pairing,
) -> Result<ColouredGraph, MoveError> {
    e.check(g)?;
    f.check(g)?;
    if e.colour != f.colour {
        return Err(MoveError::NotAnEdge(f.a, f.b, e.colour));
    }
    if e.touches(f.a) || e.touches(f.b) {
        return Err(MoveError::SharedVertex);
    }
    let mut ed = Editor::new(g);
    let c = e.colour;
    match pairing {
        Pairing::Straight => {
            ed.join(e.a, f.a, c);
            ed.join(e.b, f.b, c);
        }
        Pairing::Crossed => {
            ed.join(e.a, f.b, c);
            ed.join(e.b, f.a, c);
        }
    }
    Ok(ed.finish())
}

/// The pairing that splits the `{c, j}`-cycle through both `e` and `f` into
/// two; `None` when the edges lie in different `{c, j}`-cycles.
pub fn splitting_pairing(g: &ColouredGraph, e: Edge, f: Edge, j: usize) -> Option<Pairing> {
    let c = e.colour;
    // walk from e.b away from e until an endpoint of f is hit
    let mut v = e.b;
    loop {
        v = g.partner(v, j);
        if v == f.a {
            return Some(Pairing::Crossed);
        }
        if v == f.b {
            return Some(Pairing::Straight);
        }
        if v == e.a {
            return None;
        }
        v = g.partner(v, c);
    }
}

/// Pairing that splits every cycle shared by `e` and `f` over the colours of
/// `shared`. `Ok(None)` when no cycle is shared; an error when the cycles
/// demand different pairings.
fn consensus_pairing(
    g: &ColouredGraph,
    e: Edge,
    f: Edge,
    shared: ColourSet,
) -> Result<Option<Pairing>, MoveError> {
    let mut choice = None;
    for j in shared.iter() {
        let p = splitting_pairing(g, e, f, j).ok_or(MoveError::NotRhoPair)?;
        match choice {
            None => choice = Some(p),
            Some(q) if q != p => return Err(MoveError::NoAdmissiblePairing),
            _ => {}
        }
    }
    Ok(choice)
}

fn shared_cycles(g: &ColouredGraph, e: Edge, f: Edge) -> ColourSet {
    (0..g.colours())
        .filter(|&j| j != e.colour && splitting_pairing(g, e, f, j).is_some())
        .collect()
}

/// Switches a ρ-pair with the pairing that splits every shared cycle.
pub fn switch_rho_pair(
    g: &ColouredGraph,
    rp: &RhoPair,
) -> Result<(ColouredGraph, Pairing), MoveError> {
    rp.e.check(g)?;
    rp.f.check(g)?;
    let n = g.dimension();
    let shared = shared_cycles(g, rp.e, rp.f);
    if shared != rp.shared || !(shared.len() == n || shared.len() + 1 == n) {
        return Err(MoveError::NotRhoPair);
    }
    let pairing = match consensus_pairing(g, rp.e, rp.f, shared) {
        Ok(Some(p)) => p,
        Ok(None) => return Err(MoveError::NotRhoPair),
        Err(MoveError::NoAdmissiblePairing) => {
            // only possible off bipartite graphs: keep the pairing splitting
            // most cycles, then the smaller resulting graph
            let straight = shared
                .iter()
                .filter(|&j| splitting_pairing(g, rp.e, rp.f, j) == Some(Pairing::Straight))
                .count();
            let crossed = shared.len() - straight;
            let p = if straight != crossed {
                if straight > crossed {
                    Pairing::Straight
                } else {
                    Pairing::Crossed
                }
            } else {
                let a = switch_edges(g, rp.e, rp.f, Pairing::Straight)?;
                let b = switch_edges(g, rp.e, rp.f, Pairing::Crossed)?;
                if a.raw() <= b.raw() {
                    Pairing::Straight
                } else {
                    Pairing::Crossed
                }
            };
            warn!("conflicting split pairings for {rp:?}; chose {p:?}");
            p
        }
        Err(err) => return Err(err),
    };
    Ok((switch_edges(g, rp.e, rp.f, pairing)?, pairing))
}

/// s-flip: switches the `colour`-edge `e` of the `h`-dipole `(d.u, d.w)`
/// (`h >= 2`) with an equally coloured edge `f` outside it, so that the
/// dipole becomes an `(h-1)`-dipole. The cycle-splitting pairing is tried
/// first.
pub fn s_flip(
    g: &ColouredGraph,
    d: &Dipole,
    colour: usize,
    f: Edge,
) -> Result<ColouredGraph, MoveError> {
    let bad = |m: &str| MoveError::NotAFlipConfiguration(m.to_string());
    if dipole_at(g, d.u, d.w).map(|x| x.colours) != Some(d.colours) {
        return Err(bad("not a dipole"));
    }
    if !d.colours.contains(colour) || d.h() < 2 {
        return Err(bad("edge not in a dipole of order at least 2"));
    }
    f.check(g)?;
    if f.colour != colour {
        return Err(bad("colours differ"));
    }
    let e = Edge::oriented(g, d.u, colour);
    if f.touches(d.u) || f.touches(d.w) {
        return Err(MoveError::SharedVertex);
    }
    let target = d.colours.without(colour);
    let first = match consensus_pairing(g, e, f, shared_cycles(g, e, f)) {
        Ok(Some(p)) => p,
        _ => Pairing::Straight,
    };
    for pairing in [first, first.other()] {
        let h = switch_edges(g, e, f, pairing)?;
        if dipole_at(&h, d.u, d.w).map(|x| x.colours) == Some(target) {
            return Ok(h);
        }
    }
    Err(bad("no pairing leaves an (h-1)-dipole"))
}

/// t-flip: for an `h`-dipole `(d.u, d.w)` with `h <= n-1` and a colour
/// outside it, joins `d.u` and `d.w` by that colour and their former
/// partners to each other, producing an `(h+1)`-dipole.
pub fn t_flip(g: &ColouredGraph, d: &Dipole, colour: usize) -> Result<ColouredGraph, MoveError> {
    let bad = |m: &str| MoveError::NotAFlipConfiguration(m.to_string());
    g.check_colour(colour)?;
    if dipole_at(g, d.u, d.w).map(|x| x.colours) != Some(d.colours) {
        return Err(bad("not a dipole"));
    }
    if d.colours.contains(colour) || d.h() + 1 > g.dimension() {
        return Err(bad("colour inside the dipole or dipole too large"));
    }
    let e = Edge::oriented(g, d.u, colour);
    let f = Edge::oriented(g, d.w, colour);
    if e.b == f.b {
        return Err(MoveError::LoopCreated);
    }
    switch_edges(g, e, f, Pairing::Straight)
}

/// Outcome of [`reduce`]. In dimension 2 a split recorded as
/// non-orientable is a cross-cap (an embedded circle can be one-sided
/// there); from dimension 3 on every split is a handle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub graph: ColouredGraph,
    pub orientable_handles: usize,
    pub nonorientable_handles: usize,
    pub dipoles_eliminated: usize,
    pub rho_minus_switches: usize,
    pub rho_switches: usize,
}

impl Reduction {
    pub fn handles(&self) -> usize {
        self.orientable_handles + self.nonorientable_handles
    }
}

/// Reduces a gem of a closed manifold to a rigid dipole-free crystallization,
/// splitting off one handle per ρ_n-pair switch.
pub fn reduce(g: &ColouredGraph) -> Result<Reduction, MoveError> {
    let n = g.dimension();
    let mut cur = g.clone();
    let mut out = Reduction {
        graph: g.clone(),
        orientable_handles: 0,
        nonorientable_handles: 0,
        dipoles_eliminated: 0,
        rho_minus_switches: 0,
        rho_switches: 0,
    };
    let mut just_switched = false;
    loop {
        if let Some(d) = all_dipoles(&cur).first() {
            cur = eliminate_dipole(&cur, d)?;
            out.dipoles_eliminated += 1;
            just_switched = false;
            continue;
        }
        if just_switched {
            return Err(MoveError::NoDipoleAfterSwitch);
        }
        if !cur.is_contracted() {
            return Err(MoveError::StuckNotContracted);
        }
        if n < 2 {
            break;
        }
        let pairs = rho_pairs_at_least(&cur, n - 1);
        let pick = pairs
            .iter()
            .find(|r| r.s() == n - 1)
            .or_else(|| pairs.iter().find(|r| r.s() == n));
        let Some(rp) = pick else {
            break;
        };
        if rp.s() == n {
            if cur.is_bipartite() {
                out.orientable_handles += 1;
            } else {
                out.nonorientable_handles += 1;
            }
            out.rho_switches += 1;
            debug!("handle split off by ρ_{n} switch at {rp:?}");
        } else {
            out.rho_minus_switches += 1;
        }
        cur = switch_rho_pair(&cur, rp)?.0;
        just_switched = true;
    }
    out.graph = cur;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::code;

    #[test]
    fn standard_has_no_dipoles_or_pairs() {
        let g = ColouredGraph::standard(5);
        assert!(all_dipoles(&g).is_empty());
        for s in 0..=4 {
            assert!(find_rho_pairs(&g, s).is_empty());
        }
        assert!(is_rigid(&g));
    }

    #[test]
    fn blob_round_trip() {
        let g = ColouredGraph::standard(5);
        let (h, d) = insert_blob(&g, 0, 0).unwrap();
        assert_eq!(h.order(), 4);
        // the old vertices 0, 1 form a second 4-dipole, and the two
        // 0-edges between them are 1-dipoles
        let ds = all_dipoles(&h);
        assert_eq!(ds.iter().map(Dipole::h).collect::<Vec<_>>(), [4, 4, 1, 1]);
        assert!(ds.contains(&d));
        assert_eq!(d.h(), 4);
        let back = eliminate_dipole(&h, &d).unwrap();
        assert_eq!(code(&back).unwrap(), code(&g).unwrap());
        assert!(!h.is_contracted());
    }

    #[test]
    fn blob_errors() {
        let g = ColouredGraph::standard(5);
        assert!(matches!(
            insert_blob(&g, 7, 0),
            Err(MoveError::Graph(GraphError::InvalidVertex(7)))
        ));
        assert!(matches!(
            insert_blob(&g, 0, 5),
            Err(MoveError::Graph(GraphError::InvalidColour(5)))
        ));
    }

    #[test]
    fn eliminate_rejects_non_dipole() {
        let g = ColouredGraph::standard(5);
        let d = Dipole {
            u: 0,
            w: 1,
            colours: ColourSet::full(5),
        };
        assert!(matches!(
            eliminate_dipole(&g, &d),
            Err(MoveError::NotADipole(_))
        ));
    }

    #[test]
    fn switch_is_an_involution() {
        let g = ColouredGraph::standard(5);
        let (h, _) = insert_blob(&g, 0, 0).unwrap();
        let (h, _) = insert_blob(&h, 1, 2).unwrap();
        let e = Edge::at(&h, 0, 1);
        let f = (0..h.order())
            .map(|v| Edge::at(&h, v, 1))
            .find(|f| !e.touches(f.a) && !e.touches(f.b))
            .unwrap();
        for p in [Pairing::Straight, Pairing::Crossed] {
            let once = switch_edges(&h, e, f, p).unwrap();
            let e2 = Edge::oriented(&once, e.a, 1);
            let f2 = Edge::oriented(&once, e.b, 1);
            let back = switch_edges(&once, e2, f2, Pairing::Straight).unwrap();
            assert_eq!(back, h);
        }
        assert_eq!(
            switch_edges(&h, e, e, Pairing::Straight),
            Err(MoveError::SharedVertex)
        );
    }

    #[test]
    fn s_flip_lowers_blob() {
        let g = ColouredGraph::standard(5);
        let (h, _) = insert_blob(&g, 0, 0).unwrap();
        let (h, d) = insert_blob(&h, 0, 0).unwrap();
        // the 1-edge at vertex 0 lies outside the newest blob
        let f = Edge::at(&h, 0, 1);
        let flipped = s_flip(&h, &d, 1, f).unwrap();
        let dd = dipole_at(&flipped, d.u, d.w).unwrap();
        assert_eq!(dd.colours, d.colours.without(1));
        let back = t_flip(&flipped, &dd, 1).unwrap();
        assert_eq!(code(&back).unwrap(), code(&h).unwrap());
    }

    #[test]
    fn reduce_standard() {
        let g = ColouredGraph::standard(5);
        let r = reduce(&g).unwrap();
        assert_eq!(r.graph, g);
        assert_eq!(r.handles(), 0);
    }
}
