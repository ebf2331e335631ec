#![allow(dead_code)]

use std::path::PathBuf;

use gemcat::graph::{ColourSet, ColouredGraph};
use gemcat::io::parse_catalogue;
use gemcat::moves::{
    all_dipoles, eliminate_dipole, find_rho_pairs, insert_blob, insert_dipole, s_flip, switch_rho_pair,
    t_flip, Edge,
};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Members of a stored catalogue, in file order.
pub fn catalogue(name: &str) -> Vec<ColouredGraph> {
    let text = std::fs::read_to_string(data_path(name)).expect("fixture");
    parse_catalogue(&text)
        .expect("fixture parses")
        .codes
        .iter()
        .map(|c| c.to_graph())
        .collect()
}

/// The catalogue members of orders 2, 8 and 14.
pub fn all_members() -> Vec<ColouredGraph> {
    let mut v = catalogue("c2.bipartite.txt");
    v.extend(catalogue("c8.bipartite.txt"));
    v.extend(catalogue("c14.bipartite.txt"));
    v
}

/// One step of a random walk through manifold-preserving moves.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub kind: u8,
    pub a: u16,
    pub b: u16,
}

/// Graphs above this order only shrink.
pub const WALK_ORDER_CAP: usize = 40;

/// Applies the steps that are admissible, returning `(kind, graph)` after
/// each successful move. Kinds: 0 dipole insertion, 1 blob insertion,
/// 2 dipole elimination, 3 t-flip, 4 s-flip, 5 ρ_{n-1}-pair switch.
pub fn walk(start: &ColouredGraph, steps: &[Step]) -> Vec<(u8, ColouredGraph)> {
    let mut g = start.clone();
    let mut out = Vec::new();
    let k = g.colours();
    let n = g.dimension();
    for s in steps {
        let a = s.a as usize;
        let b = s.b as usize;
        let v = a % g.order();
        let grow = g.order() < WALK_ORDER_CAP;
        let next = match s.kind % 6 {
            0 if grow => {
                let full = (1u32 << k) - 1;
                let bits = 1 + (b as u32 % (full - 1));
                insert_dipole(&g, v, ColourSet::from_bits(bits)).ok().map(|x| x.0)
            }
            1 if grow => insert_blob(&g, v, b % k).ok().map(|x| x.0),
            2 => {
                let ds = all_dipoles(&g);
                (!ds.is_empty())
                    .then(|| eliminate_dipole(&g, &ds[b % ds.len()]).ok())
                    .flatten()
            }
            3 => {
                let ds = all_dipoles(&g);
                if ds.is_empty() {
                    None
                } else {
                    let d = ds[b % ds.len()];
                    let outside: Vec<usize> = (0..k).filter(|&c| !d.colours.contains(c)).collect();
                    t_flip(&g, &d, outside[a % outside.len()]).ok()
                }
            }
            4 => {
                let ds: Vec<_> = all_dipoles(&g).into_iter().filter(|d| d.h() >= 2).collect();
                if ds.is_empty() {
                    None
                } else {
                    let d = ds[b % ds.len()];
                    let inside: Vec<usize> = d.colours.iter().collect();
                    let c = inside[a % inside.len()];
                    s_flip(&g, &d, c, Edge::at(&g, v, c)).ok()
                }
            }
            5 => {
                let ps = find_rho_pairs(&g, n - 1);
                (!ps.is_empty())
                    .then(|| switch_rho_pair(&g, &ps[b % ps.len()]).ok().map(|x| x.0))
                    .flatten()
            }
            _ => None,
        };
        if let Some(h) = next {
            g = h;
            out.push((s.kind % 6, g.clone()));
        }
    }
    out
}
