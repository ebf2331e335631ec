mod common;

use std::collections::BTreeSet;

use common::catalogue;
use gemcat::code::code;
use gemcat::generation::{
    boundary_graph, catalogue_from_seeds, extend_seed, generate_catalogue, generate_s3, is_catalogue_member,
    GenerationError, PartialGraph,
};
use gemcat::graph::ColouredGraph;
use gemcat::moves::{insert_blob, rho_pairs_at_least};
use gemcat::topology::recognize_s3;

#[test]
fn small_s3_counts() {
    let counts: Vec<usize> = (1..=5).map(|p| generate_s3(2 * p).unwrap().len()).collect();
    // order 4: the graph with colours 0, 1 = (12)(34) and 2, 3 = (13)(24)
    assert_eq!(counts, vec![1, 1, 2, 9, 39]);
}

#[test]
fn s3_members_are_spheres_without_triple_pairs() {
    for order in [4, 6, 8] {
        for c in generate_s3(order).unwrap() {
            let g = c.to_graph();
            assert_eq!(g.colours(), 4);
            assert!(g.is_connected());
            assert!(recognize_s3(&g).unwrap());
            assert!(rho_pairs_at_least(&g, 3).is_empty());
            assert_eq!(code(&g).unwrap(), c);
        }
    }
}

#[test]
fn small_catalogue_counts() {
    let mut bip = Vec::new();
    for p in 1..=5 {
        let cat = generate_catalogue(2 * p).unwrap();
        assert!(cat.nonbipartite.is_empty());
        bip.push(cat.bipartite.len());
    }
    assert_eq!(bip, vec![1, 0, 0, 1, 0]);
}

#[test]
fn stored_catalogues_match_generation() {
    for (order, name) in [(2, "c2.bipartite.txt"), (8, "c8.bipartite.txt")] {
        let stored: Vec<_> = catalogue(name).iter().map(|g| code(g).unwrap()).collect();
        assert_eq!(generate_catalogue(order).unwrap().bipartite, stored);
    }
}

#[test]
fn pruning_agrees_with_unpruned_search_at_order_8() {
    let seeds = generate_s3(8).unwrap();
    let mut pruned = BTreeSet::new();
    let mut full = BTreeSet::new();
    for s in &seeds {
        pruned.extend(extend_seed(&s.to_graph(), true).unwrap());
        full.extend(extend_seed(&s.to_graph(), false).unwrap());
    }
    assert_eq!(pruned, full);
    assert_eq!(pruned.len(), 1);
    assert_eq!(catalogue_from_seeds(&seeds, true).unwrap().len(), 1);
}

#[test]
fn generation_is_deterministic() {
    assert_eq!(generate_s3(10).unwrap(), generate_s3(10).unwrap());
    assert_eq!(generate_catalogue(8).unwrap(), generate_catalogue(8).unwrap());
}

#[test]
fn unsupported_orders() {
    assert_eq!(generate_s3(7), Err(GenerationError::UnsupportedOrder(7)));
    assert_eq!(generate_s3(0), Err(GenerationError::UnsupportedOrder(0)));
    assert!(matches!(generate_catalogue(24), Err(GenerationError::UnsupportedOrder(24))));
}

#[test]
fn membership_predicate() {
    let c8 = &catalogue("c8.bipartite.txt")[0];
    assert!(is_catalogue_member(c8));
    assert!(is_catalogue_member(&ColouredGraph::standard(5)));
    let (blown, _) = insert_blob(c8, 0, 0).unwrap();
    assert!(!is_catalogue_member(&blown));
}

#[test]
fn empty_extension_has_every_vertex_on_the_boundary() {
    let seed = generate_s3(6).unwrap()[0].to_graph();
    let pg = PartialGraph::new(&seed);
    assert_eq!(pg.boundary_vertices().len(), 6);
    let b = boundary_graph(&pg).unwrap();
    assert_eq!(b.vertices.len(), 6);
}
