//! Cross-route checks at the largest supported sizes, plus capacity and
//! float-mode behavior that the unit tests keep small.

use num_traits::Zero;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use berezin::gaussian::{gaussian_integral_symbolic, SYMBOLIC_PAIR_CAP};
use berezin::graph::WeightedGraph;
use berezin::matrix::Matrix;
use berezin::scalar::{float_close, Rat, Scalar, FLOAT_ROUTE_TOL};
use berezin::verify::random_connected_graph;
use berezin::Error;

#[test]
fn berezin_tree_count_holds_at_thirteen_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let g: WeightedGraph<Rat> = random_connected_graph(&mut rng, 13);
    let det = g.tree_count(0).unwrap();
    let berezin = g.tree_count_berezin(0).unwrap();
    assert_eq!(det, berezin);
    assert!(!det.is_zero());
}

#[test]
fn symbolic_cap_is_enforced() {
    let a: Matrix<Rat> = Matrix::identity(SYMBOLIC_PAIR_CAP + 1);
    assert!(matches!(
        gaussian_integral_symbolic(&a),
        Err(Error::Capacity(_))
    ));
    // 17 vertices would need 34 generators
    let big: WeightedGraph<Rat> = WeightedGraph::grid(17, 1);
    assert!(matches!(big.tree_count_berezin(0), Err(Error::Capacity(_))));
}

#[test]
fn enumeration_cap_is_enforced() {
    // K8 has 28 > 25 edges
    let g: WeightedGraph<Rat> = WeightedGraph::complete(8);
    assert!(matches!(g.enumerate_trees(), Err(Error::Capacity(_))));
    assert!(matches!(
        g.tree_weight_sum_contraction(),
        Err(Error::Capacity(_))
    ));
    // the determinant route still runs
    assert_eq!(g.tree_count(0).unwrap(), Rat::from_i64(262144)); // 8^6
}

#[test]
fn float_mode_routes_agree_within_tolerance() {
    let g: WeightedGraph<f64> = WeightedGraph::new(
        4,
        vec![
            (0, 1, 0.5),
            (1, 2, 1.25),
            (2, 3, 2.0),
            (0, 3, 0.75),
            (0, 2, 1.0),
        ],
    )
    .unwrap();
    let det = g.tree_count(0).unwrap();
    let enumerated = g.tree_weight_sum_enumerated().unwrap();
    let berezin = g.tree_count_berezin(0).unwrap();
    assert!(float_close(det, enumerated, FLOAT_ROUTE_TOL));
    assert!(float_close(det, berezin, FLOAT_ROUTE_TOL));
    let p = g.edge_inclusion_probability(&[0]).unwrap();
    let p_enum = g.event_probability_enumerated(&[0], &[]).unwrap();
    assert!(float_close(p, p_enum, FLOAT_ROUTE_TOL));
}

#[test]
fn transfer_entries_on_a_four_vertex_path() {
    // disjoint bridges on the path 0-1-2-3: every tree contains both
    let g: WeightedGraph<Rat> = WeightedGraph::grid(4, 1);
    let e = g.oriented(g.edge_index(0, 1).unwrap()).unwrap();
    let f = g.oriented(g.edge_index(2, 3).unwrap()).unwrap();
    let t = g.transfer_impedance(3, &[e, f]).unwrap();
    // diagonal entries are bridge probabilities
    assert_eq!(t.bare.at(0, 0), &Rat::from_i64(1));
    assert_eq!(t.bare.at(1, 1), &Rat::from_i64(1));
    // off-diagonal entries recomputed from inverse-Laplacian combinations
    let inv = g.reduced_neg_laplacian(3).unwrap().inverse().unwrap();
    let lookup = |x: usize, u: usize| -> Rat {
        if x == 3 || u == 3 {
            Rat::zero()
        } else {
            inv.at(x, u).clone()
        }
    };
    let expected = lookup(0, 2) - lookup(1, 2) - lookup(0, 3) + lookup(1, 3);
    assert_eq!(t.bare.at(0, 1), &expected);
    // the 2x2 block determinant is the joint inclusion probability, 1
    assert_eq!(t.weighted.determinant().unwrap(), Rat::from_i64(1));
    assert_eq!(
        g.edge_inclusion_probability(&[g.edge_index(0, 1).unwrap(), g.edge_index(2, 3).unwrap()])
            .unwrap(),
        Rat::from_i64(1)
    );
}
