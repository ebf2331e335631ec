//! Partition of rigid dipole-free crystallizations into classes of graphs
//! connected by one blob, a run of s-flips and a reduction.
//!
//! Every input graph is numbered canonically, so `v_i` is well defined. A
//! parameter tuple `(i, c, x, τ)` inserts a blob on the `c`-edge at `v_i`,
//! then for each colour `k` of `ĉ` in increasing order tries the s-flip of
//! the blob's `τ(k)`-edge against the `τ(k)`-edge at `v_{x_k}`, and finally
//! reduces. Two inputs are merged when some of their images have the same
//! code (and the same handle counts). Distinct classes are only "not
//! merged": nothing here proves two graphs are different.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use log::{debug, info, warn};
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{canonical_graph, code, permutations, Code, CodeError};
use crate::graph::ColouredGraph;
use crate::moves::{insert_blob, reduce, s_flip, Dipole, Edge, MoveError};
use crate::topology::{betti2, euler_characteristic};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassificationError {
    #[error("inputs have different numbers of colours ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("class {class} has conflicting labels {first:?} and {second:?}")]
    ConflictingLabels {
        class: usize,
        first: String,
        second: String,
    },
    #[error("representative index {0} out of range")]
    NoSuchInput(usize),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Parameters of one blob-and-flips sequence. Indices are 1-based like the
/// canonical numbering `v_1..v_{2p}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ThetaParams {
    pub i: usize,
    pub c: usize,
    /// `x[j]` is used for the `j`-th colour of `ĉ` in increasing order.
    pub x: Vec<usize>,
    /// `tau[j]` is the image under `τ` of the `j`-th colour of `ĉ`.
    pub tau: Vec<usize>,
}

impl fmt::Display for ThetaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x: Vec<String> = self.x.iter().map(|v| v.to_string()).collect();
        let t: Vec<String> = self.tau.iter().map(|v| v.to_string()).collect();
        write!(f, "i={} c={} x=({}) tau=({})", self.i, self.c, x.join(","), t.join(","))
    }
}

impl ThetaParams {
    fn validate(&self, g: &ColouredGraph) -> Result<(), ClassificationError> {
        let bad = |m: String| Err(ClassificationError::InvalidParams(m));
        let n = g.dimension();
        let order = g.order();
        if self.i == 0 || self.i > order {
            return bad(format!("i = {} outside 1..={order}", self.i));
        }
        if self.c > n {
            return bad(format!("colour {} outside 0..={n}", self.c));
        }
        if self.x.len() != n || self.x.iter().any(|&v| v == 0 || v > order) {
            return bad(format!("x must have {n} entries in 1..={order}"));
        }
        let mut sorted = self.tau.clone();
        sorted.sort_unstable();
        let hat: Vec<usize> = (0..=n).filter(|&k| k != self.c).collect();
        if sorted != hat {
            return bad(format!("tau must be a permutation of {hat:?}"));
        }
        Ok(())
    }
}

/// Result of one θ application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaImage {
    pub graph: ColouredGraph,
    pub flips: usize,
    pub orientable_handles: usize,
    pub nonorientable_handles: usize,
}

impl ThetaImage {
    pub fn handles(&self) -> (usize, usize) {
        (self.orientable_handles, self.nonorientable_handles)
    }
}

/// Applies θ to a graph that is already numbered canonically (vertex
/// `v_i` is vertex `i - 1`). Flips that do not exist are skipped.
pub fn apply_theta(g: &ColouredGraph, params: &ThetaParams) -> Result<ThetaImage, ClassificationError> {
    params.validate(g)?;
    let (mut cur, blob) = insert_blob(g, params.i - 1, params.c)?;
    let mut dipole: Dipole = blob;
    let mut flips = 0;
    for (j, &colour) in params.tau.iter().enumerate() {
        if dipole.h() < 2 || !dipole.colours.contains(colour) {
            continue;
        }
        let f = Edge::at(&cur, params.x[j] - 1, colour);
        if [f.a, f.b].iter().any(|&v| v == dipole.u || v == dipole.w) {
            continue;
        }
        match s_flip(&cur, &dipole, colour, f) {
            Ok(next) => {
                cur = next;
                dipole.colours = dipole.colours.without(colour);
                flips += 1;
            }
            Err(MoveError::NotAFlipConfiguration(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let r = reduce(&cur)?;
    Ok(ThetaImage {
        graph: r.graph,
        flips,
        orientable_handles: r.orientable_handles,
        nonorientable_handles: r.nonorientable_handles,
    })
}

/// Deterministic enumeration of the parameter space of graphs with a given
/// order and number of colours.
///
/// The space is indexed in mixed radix (`i` fastest, then `c`, then the
/// entries of `x`, then `τ` in lexicographic order of permutations). To
/// spread any prefix of the schedule over the whole space, position `t`
/// visits index `t·S mod N` with a fixed stride `S` coprime to `N`.
#[derive(Debug, Clone)]
pub struct ThetaSchedule {
    order: usize,
    colours: usize,
    size: u64,
    stride: u64,
    perms: Vec<Vec<usize>>,
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl ThetaSchedule {
    pub fn new(order: usize, colours: usize) -> Self {
        let n = colours - 1;
        let perms = permutations(n);
        let size = (order as u64)
            * colours as u64
            * (order as u64).pow(n as u32)
            * perms.len() as u64;
        // a prime near size / golden ratio, coprime to the size
        let mut stride = ((size as f64) * 0.618_033_988_75) as u64 | 1;
        while !(is_prime(stride) && gcd(stride, size) == 1) && stride < size {
            stride += 2;
        }
        if size <= 2 || stride >= size {
            stride = 1;
        }
        ThetaSchedule {
            order,
            colours,
            size,
            stride,
            perms,
        }
    }

    /// Number of distinct parameter tuples.
    pub fn len(&self) -> u64 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// The parameters visited at position `t` (`t < len()`).
    pub fn params(&self, t: u64) -> ThetaParams {
        let mut j = ((t as u128 * self.stride as u128) % self.size as u128) as u64;
        let order = self.order as u64;
        let n = self.colours - 1;
        let i = (j % order) as usize + 1;
        j /= order;
        let c = (j % self.colours as u64) as usize;
        j /= self.colours as u64;
        let mut x = Vec::with_capacity(n);
        for _ in 0..n {
            x.push((j % order) as usize + 1);
            j /= order;
        }
        let hat: Vec<usize> = (0..self.colours).filter(|&k| k != c).collect();
        let tau = self.perms[j as usize].iter().map(|&p| hat[p]).collect();
        ThetaParams { i, c, x, tau }
    }
}

/// How a code was reached: from an input directly, or as a θ-image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub input: usize,
    pub params: Option<ThetaParams>,
}

/// One union performed during classification: both witnesses produce the
/// same code with the same handle counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub code: String,
    pub handles: (usize, usize),
    pub first: Witness,
    pub second: Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyOptions {
    /// θ applications per graph per pass.
    pub budget: usize,
    pub passes: usize,
    /// Stop after a pass that merged nothing.
    pub stop_when_stable: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            budget: 200,
            passes: 5,
            stop_when_stable: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassStats {
    pub applications: u64,
    pub failures: u64,
    pub handle_events: u64,
    pub blocked_by_handles: u64,
    pub passes_run: usize,
}

/// Outcome of [`classify`].
#[derive(Debug, Clone)]
pub struct ClassPartition {
    /// Canonical codes of the inputs, in input order.
    pub codes: Vec<Code>,
    /// `class[i]` is the class of input `i`; classes are numbered by their
    /// smallest member.
    pub class: Vec<usize>,
    pub merges: Vec<Merge>,
    pub stats: ClassStats,
    /// Per-class labels, filled by [`label_classes`].
    pub labels: BTreeMap<usize, String>,
}

impl ClassPartition {
    /// Members of each class, classes in order of their smallest member.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in self.class.iter().enumerate() {
            by.entry(c).or_default().push(i);
        }
        by.into_values().collect()
    }

    pub fn class_count(&self) -> usize {
        self.classes().len()
    }

    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class[a] == self.class[b]
    }

    pub fn label_of(&self, input: usize) -> Option<&str> {
        self.labels.get(&self.class[input]).map(String::as_str)
    }

    /// One record per class.
    pub fn report(&self) -> Vec<ClassRecord> {
        self.classes()
            .into_iter()
            .map(|members| {
                let id = self.class[members[0]];
                let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
                for &m in &members {
                    *sizes.entry(self.codes[m].order()).or_default() += 1;
                }
                let merged_by = self
                    .merges
                    .iter()
                    .filter(|m| self.class[m.first.input] == id)
                    .cloned()
                    .collect();
                ClassRecord {
                    class_id: id,
                    label: self.labels.get(&id).cloned(),
                    size: members.len(),
                    sizes_by_order: sizes,
                    members: members.iter().map(|&m| self.codes[m].to_string()).collect(),
                    merged_by,
                }
            })
            .collect()
    }
}

/// Serialized form of one class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub class_id: usize,
    pub label: Option<String>,
    pub size: usize,
    pub sizes_by_order: BTreeMap<usize, usize>,
    pub members: Vec<String>,
    pub merged_by: Vec<Merge>,
}

/// Code and handle counts of a reduced θ-image.
type ImageOutcome = Result<(Code, (usize, usize)), ClassificationError>;

struct Owner {
    input: usize,
    params: Option<ThetaParams>,
}

struct State {
    uf: UnionFind<usize>,
    /// First witness of each (code, handle counts).
    owners: HashMap<(Code, (usize, usize)), Owner>,
    /// Handle counts under which each code was first reached.
    first_handles: HashMap<Code, (usize, usize)>,
    merges: Vec<Merge>,
    stats: ClassStats,
}

impl State {
    fn record(&mut self, code: Code, handles: (usize, usize), input: usize, params: Option<ThetaParams>) {
        let first = *self.first_handles.entry(code.clone()).or_insert(handles);
        if first != handles {
            self.stats.blocked_by_handles += 1;
            warn!("code {code} reached with handles {handles:?} and {first:?}; not merging across them");
        }
        match self.owners.entry((code, handles)) {
            Entry::Vacant(slot) => {
                slot.insert(Owner { input, params });
            }
            Entry::Occupied(slot) => {
                let owner = slot.get();
                if self.uf.union(owner.input, input) {
                    let code = &slot.key().0;
                    debug!("merged inputs {} and {input} via {code}", owner.input);
                    self.merges.push(Merge {
                        code: code.to_string(),
                        handles,
                        first: Witness {
                            input: owner.input,
                            params: owner.params.clone(),
                        },
                        second: Witness { input, params },
                    });
                }
            }
        }
    }
}

/// Partitions the inputs by θ-image code coincidence.
///
/// Pass `k` applies, to every input, the parameters at schedule positions
/// `k·budget .. (k+1)·budget`. Images are computed in parallel; merges are
/// then applied in input order and schedule order, so the result does not
/// depend on the number of workers.
pub fn classify(
    graphs: &[ColouredGraph],
    options: ClassifyOptions,
) -> Result<ClassPartition, ClassificationError> {
    if let Some(first) = graphs.first() {
        if let Some(g) = graphs.iter().find(|g| g.colours() != first.colours()) {
            return Err(ClassificationError::DimensionMismatch(first.colours(), g.colours()));
        }
    }
    let canon: Vec<ColouredGraph> = graphs
        .iter()
        .map(canonical_graph)
        .collect::<Result<_, _>>()?;
    let codes: Vec<Code> = canon.iter().map(code).collect::<Result<_, _>>()?;
    let mut st = State {
        uf: UnionFind::new(graphs.len()),
        owners: HashMap::new(),
        first_handles: HashMap::new(),
        merges: Vec::new(),
        stats: ClassStats::default(),
    };

    for (i, c) in codes.iter().enumerate() {
        st.record(c.clone(), (0, 0), i, None);
    }

    let mut schedules: HashMap<usize, ThetaSchedule> = HashMap::new();
    for g in &canon {
        schedules
            .entry(g.order())
            .or_insert_with(|| ThetaSchedule::new(g.order(), g.colours()));
    }

    for pass in 0..options.passes {
        let before = st.merges.len();
        let start = (pass * options.budget) as u64;
        let jobs: Vec<(usize, u64)> = canon
            .iter()
            .enumerate()
            .flat_map(|(gi, g)| {
                let len = schedules[&g.order()].len();
                (start..(start + options.budget as u64).min(len)).map(move |t| (gi, t))
            })
            .collect();
        if jobs.is_empty() {
            break;
        }
        let results: Vec<(usize, ThetaParams, ImageOutcome)> = jobs
            .par_iter()
            .map(|&(gi, t)| {
                let params = schedules[&canon[gi].order()].params(t);
                let out = apply_theta(&canon[gi], &params)
                    .and_then(|img| Ok((code(&img.graph)?, img.handles())));
                (gi, params, out)
            })
            .collect();
        for (gi, params, out) in results {
            st.stats.applications += 1;
            match out {
                Ok((c, handles)) => {
                    if handles != (0, 0) {
                        st.stats.handle_events += 1;
                        warn!("handle split off in θ-image of input {gi} ({params})");
                    }
                    st.record(c, handles, gi, Some(params));
                }
                Err(e) => {
                    st.stats.failures += 1;
                    warn!("θ application failed on input {gi} ({params}): {e}");
                }
            }
        }
        st.stats.passes_run = pass + 1;
        let classes = (0..graphs.len()).filter(|&i| st.uf.find(i) == i).count();
        info!(
            "pass {}: {} merges, {} classes, {} codes seen",
            pass + 1,
            st.merges.len() - before,
            classes,
            st.owners.len()
        );
        if options.stop_when_stable && st.merges.len() == before {
            break;
        }
    }

    // number classes by their smallest member
    let mut first_of_root: HashMap<usize, usize> = HashMap::new();
    let mut class = Vec::with_capacity(graphs.len());
    for i in 0..graphs.len() {
        let root = st.uf.find(i);
        class.push(*first_of_root.entry(root).or_insert(i));
    }
    Ok(ClassPartition {
        codes,
        class,
        merges: st.merges,
        stats: st.stats,
        labels: BTreeMap::new(),
    })
}

pub const LABEL_S4: &str = "S4";
pub const LABEL_CP2: &str = "CP2";
pub const LABEL_CP2_CP2: &str = "CP2#CP2";
pub const LABEL_CP2_MINUS_CP2: &str = "CP2#-CP2";
pub const LABEL_S2XS2: &str = "S2xS2";

/// Labels classes from representatives `(input index, label)`. When the
/// classes of `CP2#CP2` and `CP2#-CP2` are known and exactly one other
/// class has `β₂ = 2`, that class is labelled `S2xS2`: among closed
/// simply-connected 4-manifolds with `β₂ = 2` these are the only
/// candidates in the catalogues' range. Other classes stay unlabelled.
pub fn label_classes(
    partition: &mut ClassPartition,
    representatives: &[(usize, &str)],
) -> Result<(), ClassificationError> {
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    for &(input, label) in representatives {
        let class = *partition
            .class
            .get(input)
            .ok_or(ClassificationError::NoSuchInput(input))?;
        match labels.get(&class) {
            Some(existing) if existing != label => {
                return Err(ClassificationError::ConflictingLabels {
                    class,
                    first: existing.clone(),
                    second: label.to_string(),
                });
            }
            _ => {
                labels.insert(class, label.to_string());
            }
        }
    }
    let known = |l: &str| labels.values().any(|x| x == l);
    if known(LABEL_CP2_CP2) && known(LABEL_CP2_MINUS_CP2) && !known(LABEL_S2XS2) {
        let unlabelled_beta2: Vec<usize> = partition
            .classes()
            .iter()
            .map(|m| partition.class[m[0]])
            .filter(|c| !labels.contains_key(c))
            .filter(|&c| {
                let g = partition.codes[c].to_graph();
                g.colours() == 5 && betti2(&g) == Ok(2) && euler_characteristic(&g) == 4
            })
            .collect();
        if let [only] = unlabelled_beta2[..] {
            labels.insert(only, LABEL_S2XS2.to_string());
        }
    }
    partition.labels = labels;
    Ok(())
}
