//! Canonical codes: a complete invariant of coloured graphs up to
//! colour-isomorphism (vertex relabelling plus colour renaming).
//!
//! For every root vertex and every ordering of the colours, vertices are
//! numbered breadth-first (the root gets 1, then the partners of each
//! numbered vertex in colour order). The candidate word lists, colour by
//! colour in that order, the partner numbers of vertices `1..=order`. The
//! code is the least candidate word.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{ColouredGraph, GraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("order {0} too large for a code")]
    TooLarge(usize),
    #[error("malformed code: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Canonical code of a connected coloured graph.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code {
    colours: u8,
    order: u32,
    /// 1-based partner numbers, colour-major.
    word: Box<[u16]>,
}

impl Code {
    pub fn colours(&self) -> usize {
        self.colours as usize
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn word(&self) -> &[u16] {
        &self.word
    }

    /// The graph numbered canonically, with colours renamed to the minimizing
    /// order. `code(decode(c)) == c`.
    pub fn to_graph(&self) -> ColouredGraph {
        let k = self.colours();
        let n = self.order();
        let mut adj = vec![0u32; k * n];
        for c in 0..k {
            for v in 0..n {
                adj[v * k + c] = self.word[c * n + v] as u32 - 1;
            }
        }
        ColouredGraph::from_raw(k, n, adj)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}:{}:", self.colours, self.order)?;
        let n = self.order();
        for c in 0..self.colours() {
            if c > 0 {
                f.write_str("|")?;
            }
            for (i, x) in self.word[c * n..(c + 1) * n].iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Code({self})")
    }
}

impl FromStr for Code {
    type Err = CodeError;

    /// Parses the serialized form and checks that it is a valid code of a
    /// graph (not necessarily the minimal one; use [`code`] to canonicalize).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CodeError::Malformed(s.chars().take(40).collect());
        let rest = s.strip_prefix('c').ok_or_else(bad)?;
        let mut parts = rest.splitn(3, ':');
        let colours: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let order: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let body = parts.next().ok_or_else(bad)?;
        if colours == 0 || colours > crate::graph::MAX_COLOURS || order > u16::MAX as usize {
            return Err(bad());
        }
        let rows: Vec<&str> = body.split('|').collect();
        if rows.len() != colours {
            return Err(bad());
        }
        let mut word = Vec::with_capacity(colours * order);
        let mut matchings = Vec::with_capacity(colours);
        for row in rows {
            let vals: Vec<usize> = row
                .split(',')
                .map(|t| t.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            if vals.len() != order || vals.iter().any(|&x| x == 0 || x > order) {
                return Err(bad());
            }
            word.extend(vals.iter().map(|&x| x as u16));
            matchings.push(vals.iter().map(|&x| x - 1).collect::<Vec<_>>());
        }
        ColouredGraph::build(order, &matchings, true)?;
        Ok(Code {
            colours: colours as u8,
            order: order as u32,
            word: word.into_boxed_slice(),
        })
    }
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

fn colour_orders(k: usize) -> std::borrow::Cow<'static, [Vec<usize>]> {
    use std::borrow::Cow;
    use std::sync::OnceLock;
    static CACHE: OnceLock<Vec<Vec<Vec<usize>>>> = OnceLock::new();
    let table = CACHE.get_or_init(|| (0..=7).map(permutations).collect());
    match table.get(k) {
        Some(perms) => Cow::Borrowed(perms.as_slice()),
        None => Cow::Owned(permutations(k)),
    }
}

/// The canonical code together with the numbering that realizes it.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub code: Code,
    /// `numbering[v]` is the 0-based canonical position of vertex `v`.
    pub numbering: Vec<usize>,
    /// Colour `colour_order[k]` of the input is colour `k` of the canonical graph.
    pub colour_order: Vec<usize>,
}

impl CanonicalForm {
    /// Vertex of the input graph at canonical position `i` (0-based).
    pub fn vertex_at(&self, i: usize) -> usize {
        self.numbering.iter().position(|&x| x == i).unwrap()
    }
}

struct Scratch {
    num: Vec<u32>,
    queue: Vec<u32>,
}

/// Breadth-first numbering from `root`, scanning colours in `perm` order.
/// Returns false if some vertex is unreachable.
fn number_from(g: &ColouredGraph, root: usize, perm: &[usize], s: &mut Scratch) -> bool {
    let n = g.order();
    s.num.clear();
    s.num.resize(n, u32::MAX);
    s.queue.clear();
    s.num[root] = 0;
    s.queue.push(root as u32);
    let mut head = 0;
    while head < s.queue.len() {
        let v = s.queue[head] as usize;
        head += 1;
        for &c in perm {
            let w = g.partner(v, c);
            if s.num[w] == u32::MAX {
                s.num[w] = s.queue.len() as u32;
                s.queue.push(w as u32);
            }
        }
    }
    s.queue.len() == n
}

/// Compares the word of the current numbering with `best`. Returns
/// `Less` as soon as a smaller entry is found.
fn compare_word(
    g: &ColouredGraph,
    perm: &[usize],
    s: &Scratch,
    best: &[u16],
) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let n = g.order();
    let mut idx = 0;
    for &c in perm {
        for i in 0..n {
            let v = s.queue[i] as usize;
            let x = (s.num[g.partner(v, c)] + 1) as u16;
            match x.cmp(&best[idx]) {
                Ordering::Equal => {}
                o => return o,
            }
            idx += 1;
        }
    }
    Ordering::Equal
}

fn write_word(g: &ColouredGraph, perm: &[usize], s: &Scratch, out: &mut [u16]) {
    let n = g.order();
    let mut idx = 0;
    for &c in perm {
        for i in 0..n {
            let v = s.queue[i] as usize;
            out[idx] = (s.num[g.partner(v, c)] + 1) as u16;
            idx += 1;
        }
    }
}

/// Computes the canonical form of a connected graph.
pub fn canonical_form(g: &ColouredGraph) -> Result<CanonicalForm, CodeError> {
    canonical_form_over(g, &colour_orders(g.colours()))
}

/// Code minimized over vertex numberings only, keeping the colour order.
pub(crate) fn fixed_colour_code(g: &ColouredGraph) -> Result<Code, CodeError> {
    let id: Vec<usize> = (0..g.colours()).collect();
    canonical_form_over(g, &[id]).map(|f| f.code)
}

fn canonical_form_over(
    g: &ColouredGraph,
    orders: &[Vec<usize>],
) -> Result<CanonicalForm, CodeError> {
    let n = g.order();
    let k = g.colours();
    if n > u16::MAX as usize {
        return Err(CodeError::TooLarge(n));
    }
    let mut s = Scratch {
        num: Vec::with_capacity(n),
        queue: Vec::with_capacity(n),
    };
    let mut best = vec![u16::MAX; n * k];
    let mut best_root = usize::MAX;
    let mut best_perm: &[usize] = &[];
    for perm in orders.iter() {
        for root in 0..n {
            if !number_from(g, root, perm, &mut s) {
                return Err(CodeError::Disconnected);
            }
            if compare_word(g, perm, &s, &best) == std::cmp::Ordering::Less {
                write_word(g, perm, &s, &mut best);
                best_root = root;
                best_perm = perm;
            }
        }
    }
    if n == 0 {
        return Err(CodeError::Disconnected);
    }
    number_from(g, best_root, best_perm, &mut s);
    Ok(CanonicalForm {
        code: Code {
            colours: k as u8,
            order: n as u32,
            word: best.into_boxed_slice(),
        },
        numbering: s.num.iter().map(|&x| x as usize).collect(),
        colour_order: best_perm.to_vec(),
    })
}

/// Canonical code of a connected graph.
pub fn code(g: &ColouredGraph) -> Result<Code, CodeError> {
    canonical_form(g).map(|f| f.code)
}

/// Relabels `g` into its canonical numbering and colour order.
pub fn canonical_graph(g: &ColouredGraph) -> Result<ColouredGraph, CodeError> {
    Ok(code(g)?.to_graph())
}

pub fn colour_isomorphic(a: &ColouredGraph, b: &ColouredGraph) -> Result<bool, CodeError> {
    if a.colours() != b.colours() || a.order() != b.order() {
        // still reject disconnected inputs
        code(a)?;
        code(b)?;
        return Ok(false);
    }
    Ok(code(a)? == code(b)?)
}
