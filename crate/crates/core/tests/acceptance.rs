//! Acceptance suite: each criterion runs as one test that prints a PASS/FAIL
//! line and enforces its time budget. Run with `--nocapture` to see the
//! transcript:
//!
//! ```text
//! cargo test --test acceptance -- --nocapture
//! ```

use std::collections::HashMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use berezin::cumulants::{
    cumulants_to_moments, dgff_covariance, gradient_squared_table, isserlis_moment,
    joint_cumulant, squared_gaussian_cumulants, DgffField, GridSpec, SquaredKind,
};
use berezin::gaussian::{gaussian_integral_symbolic, wick_bilinear_det, wick_bilinear_symbolic};
use berezin::graph::WeightedGraph;
use berezin::matrix::Matrix;
use berezin::scalar::{Rat, Scalar};
use berezin::superspace::{
    localization_check, polynomial_of_inner_form, q_apply, super_inner_product, super_integrate,
    supergaussian,
};
use berezin::verify::{
    chi_square_critical_99, random_connected_graph, random_invertible, random_matrix, random_rat,
    random_spd, run_battery,
};

fn run_criterion(number: usize, name: &str, limit_secs: f64, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => {
            println!("criterion {number} ({name}): PASS in {elapsed:.2}s (limit {limit_secs}s)");
            assert!(
                elapsed < limit_secs,
                "criterion {number} exceeded its {limit_secs}s budget: {elapsed:.2}s"
            );
        }
        Err(panic) => {
            println!("criterion {number} ({name}): FAIL after {elapsed:.2}s");
            resume_unwind(panic);
        }
    }
}

#[test]
fn criterion_1_berezin_gaussian_identity() {
    run_criterion(1, "berezin gaussian integral equals determinant", 10.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for case in 0..200 {
            let m = rng.gen_range(1..=6);
            let a = random_matrix(&mut rng, m);
            let symbolic = gaussian_integral_symbolic(&a).unwrap();
            let det = a.determinant().unwrap();
            assert_eq!(symbolic, det, "case {case}, m = {m}");
        }
    });
}

#[test]
fn criterion_2_wick_bilinear() {
    run_criterion(2, "wick bilinear identity", 30.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        for case in 0..100 {
            let m = rng.gen_range(1..=5);
            let r = rng.gen_range(0..=m.min(3));
            let a = random_invertible(&mut rng, m);
            let b = Matrix::from_fn(r, m, |_, _| Rat::from_i64(rng.gen_range(-4..=4)));
            let c = Matrix::from_fn(m, r, |_, _| Rat::from_i64(rng.gen_range(-4..=4)));
            let symbolic = wick_bilinear_symbolic(&a, &b, &c).unwrap();
            let determinant = wick_bilinear_det(&a, &b, &c).unwrap();
            assert_eq!(symbolic, determinant, "case {case}, m = {m}, r = {r}");
        }
    });
}

#[test]
fn criterion_3_matrix_tree() {
    run_criterion(3, "matrix-tree theorem, three routes", 10.0, || {
        // enumeration oracle first, then the frozen values
        let fixtures: Vec<(WeightedGraph<Rat>, i64)> = vec![
            (WeightedGraph::complete(3), 3),
            (WeightedGraph::complete(4), 16),
            (WeightedGraph::grid(3, 3), 192),
        ];
        for (g, expected) in &fixtures {
            let enumerated = g.tree_weight_sum_enumerated().unwrap();
            assert_eq!(enumerated, Rat::from_i64(*expected));
            for root in 0..g.vertex_count() {
                assert_eq!(g.tree_count(root).unwrap(), enumerated);
            }
            assert_eq!(g.tree_count_berezin(0).unwrap(), enumerated);
        }
        // root invariance on random graphs
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        for _ in 0..20 {
            let n = rng.gen_range(2..=7);
            let g = random_connected_graph(&mut rng, n);
            let reference = g.tree_count(0).unwrap();
            for root in 1..n {
                assert_eq!(g.tree_count(root).unwrap(), reference);
            }
        }
    });
}

#[test]
fn criterion_4_burton_pemantle_and_edge_events() {
    run_criterion(4, "burton-pemantle and fermionic edge events", 120.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for case in 0..50 {
            let n = rng.gen_range(3..=6);
            let g = random_connected_graph(&mut rng, n);
            let edge_count = g.edges().len();
            // F for the inclusion probability
            let size = rng.gen_range(1..=3.min(edge_count));
            let mut f: Vec<usize> = Vec::new();
            while f.len() < size {
                let e = rng.gen_range(0..edge_count);
                if !f.contains(&e) {
                    f.push(e);
                }
            }
            let det_route = g.edge_inclusion_probability(&f).unwrap();
            let enumerated = g.event_probability_enumerated(&f, &[]).unwrap();
            let root = rng.gen_range(0..n);
            let fermionic = g.edge_event_probability_fermionic(&f, &[], root).unwrap();
            assert_eq!(det_route, enumerated, "case {case}: det vs enumeration");
            assert_eq!(fermionic, enumerated, "case {case}: fermionic vs enumeration");
            // disjoint F, F′ for the edge-event theorem
            let mut pool: Vec<usize> = (0..edge_count).collect();
            for i in (1..pool.len()).rev() {
                let j = rng.gen_range(0..=i);
                pool.swap(i, j);
            }
            let take_f = rng.gen_range(0..=2.min(edge_count));
            let take_fp = rng.gen_range(0..=2.min(edge_count - take_f));
            let ff = &pool[..take_f];
            let fp = &pool[take_f..take_f + take_fp];
            let event_fermionic = g.edge_event_probability_fermionic(ff, fp, 0).unwrap();
            let event_incl_excl = g
                .edge_event_probability_inclusion_exclusion(ff, fp)
                .unwrap();
            let event_enumerated = g.event_probability_enumerated(ff, fp).unwrap();
            assert_eq!(event_fermionic, event_enumerated, "case {case}: event fermionic");
            assert_eq!(event_incl_excl, event_enumerated, "case {case}: event incl-excl");
            // degree identity
            let mut sum = Rat::zero();
            for e in 0..edge_count {
                sum += g.edge_inclusion_probability(&[e]).unwrap();
            }
            assert_eq!(sum, Rat::from_i64(n as i64 - 1), "case {case}: degree identity");
        }
    });
}

#[test]
fn criterion_5_sampler_consistency() {
    run_criterion(5, "wilson sampler chi-square", 10.0, || {
        let samples = 30_000;
        let critical = chi_square_critical_99(2);
        let graphs: Vec<(WeightedGraph<Rat>, u64)> = vec![
            (WeightedGraph::complete(3), 505),
            (
                WeightedGraph::new(
                    3,
                    vec![
                        (0, 1, Rat::from_i64(1)),
                        (1, 2, Rat::from_i64(1)),
                        (0, 2, Rat::from_i64(2)),
                    ],
                )
                .unwrap(),
                606,
            ),
        ];
        for (g, seed) in &graphs {
            let freq = g.sample_frequencies(*seed, samples).unwrap();
            let trees = g.enumerate_trees().unwrap();
            let total = g.tree_weight_sum_enumerated().unwrap();
            let mut chi2 = 0.0;
            for t in &trees {
                let p = (g.tree_weight(t) / total.clone()).to_f64();
                let expected = samples as f64 * p;
                let observed = freq.get(t).copied().unwrap_or(0) as f64;
                chi2 += (observed - expected).powi(2) / expected;
            }
            assert!(
                chi2 < critical,
                "chi-square {chi2:.2} >= critical {critical:.2}"
            );
        }
    });
}

#[test]
fn criterion_6_cumulant_formulas() {
    run_criterion(6, "squared-gaussian cumulant formulas", 60.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        for case in 0..50 {
            let k = rng.gen_range(1..=5);
            let c = random_spd(&mut rng, k);
            let points: Vec<usize> = (0..k).collect();
            // real case: process covariance C/2
            let half_c = c.scale(&Rat::from_ratio(1, 2));
            let expected_real = joint_cumulant(k, |block: &[usize]| {
                let doubled: Vec<usize> = block.iter().flat_map(|&i| [i, i]).collect();
                isserlis_moment(&half_c, &doubled)
            })
            .unwrap();
            let real = squared_gaussian_cumulants(&c, &points, SquaredKind::Real).unwrap();
            assert_eq!(real, expected_real, "case {case}: real kind at k = {k}");
            // complex case through the block representation, k ≤ 4
            if k <= 4 {
                let block_cov = c.double_block_diagonal().scale(&Rat::from_ratio(1, 2));
                let expected_complex = joint_cumulant(k, |blk: &[usize]| {
                    let b_len = blk.len();
                    let mut total = Rat::zero();
                    for choice in 0u32..(1 << b_len) {
                        let doubled: Vec<usize> = blk
                            .iter()
                            .enumerate()
                            .flat_map(|(pos, &i)| {
                                let idx = if choice >> pos & 1 == 1 { i + k } else { i };
                                [idx, idx]
                            })
                            .collect();
                        total += isserlis_moment(&block_cov, &doubled);
                    }
                    total
                })
                .unwrap();
                let complex =
                    squared_gaussian_cumulants(&c, &points, SquaredKind::Complex).unwrap();
                assert_eq!(complex, expected_complex, "case {case}: complex kind at k = {k}");
            }
        }
        // moments ↔ cumulants round trip, |A| ≤ 5
        for case in 0..50 {
            let k = rng.gen_range(1..=5);
            let mut moments = HashMap::new();
            for mask in 1u32..(1 << k) {
                let sub: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                moments.insert(sub, random_rat(&mut rng));
            }
            let mut cums = HashMap::new();
            for mask in 1u32..(1 << k) {
                let sub: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                let val = joint_cumulant(sub.len(), |positions: &[usize]| {
                    let labels: Vec<usize> = positions.iter().map(|&p| sub[p]).collect();
                    moments[&labels].clone()
                })
                .unwrap();
                cums.insert(sub, val);
            }
            let top: Vec<usize> = (0..k).collect();
            let rebuilt = cumulants_to_moments(k, |positions: &[usize]| {
                let labels: Vec<usize> = positions.iter().map(|&p| top[p]).collect();
                cums[&labels].clone()
            })
            .unwrap();
            assert_eq!(rebuilt, moments[&top], "case {case}: round trip at k = {k}");
        }
    });
}

#[test]
fn criterion_7_dgff_gradient_squared() {
    run_criterion(7, "dgff gradient-squared cumulants on a 6x6 grid", 120.0, || {
        let grid = GridSpec::with_all_sides_boundary(vec![6, 6]).unwrap();
        let field: DgffField<Rat> = dgff_covariance(&grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(707);
        let interior = grid.interior();
        for case in 0..12 {
            let k = rng.gen_range(1..=3);
            let points: Vec<usize> = (0..k)
                .map(|_| interior[rng.gen_range(0..interior.len())])
                .collect();
            let direct = field.gradient_squared_cumulant(&points).unwrap();
            let oracle = field.gradient_squared_cumulant_isserlis(&points).unwrap();
            assert_eq!(direct, oracle, "case {case}: k = {k}, points {points:?}");
        }
        // the finite-size table is emitted raw: no tolerance, no limit claim
        let row = [
            grid.index(&[1, 2]).unwrap(),
            grid.index(&[2, 2]).unwrap(),
            grid.index(&[3, 2]).unwrap(),
            grid.index(&[4, 2]).unwrap(),
        ];
        let table = gradient_squared_table(&field, &row, 2).unwrap();
        println!("finite-lattice gradient-squared cumulant table (6x6):");
        print!("{}", table.to_tsv());
        // magnitude decays monotonically with separation on this grid
        let base = row[0];
        let mut previous: Option<Rat> = None;
        for (sep, &other) in row.iter().enumerate().skip(1) {
            let value = field.gradient_squared_cumulant(&[base, other]).unwrap();
            let magnitude = if value < Rat::zero() { -value } else { value };
            if let Some(prev) = &previous {
                assert!(
                    magnitude < *prev,
                    "no decay from separation {} to {}",
                    sep - 1,
                    sep
                );
            }
            previous = Some(magnitude);
        }
    });
}

#[test]
fn criterion_8_susy() {
    run_criterion(8, "supersymmetry and localization", 30.0, || {
        // Q annihilates every super inner product, m ≤ 3
        for m in 1..=3 {
            for i in 0..m {
                for j in 0..m {
                    let ip = super_inner_product::<Rat>(m, i, j);
                    assert!(q_apply(&ip).is_zero(), "Q(u_{i},u_{j}) != 0 at m = {m}");
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        // supergaussian normalization, 20 random SPD forms
        for case in 0..20 {
            let m = rng.gen_range(1..=3);
            let a = random_spd(&mut rng, m);
            let f = supergaussian(&a).unwrap();
            assert_eq!(
                super_integrate(&f).unwrap(),
                Rat::from_i64(1),
                "case {case}: normalization"
            );
        }
        // localization on 20 random Q-closed polynomial test functions
        for case in 0..20 {
            let m = rng.gen_range(1..=3);
            let a = random_spd(&mut rng, m);
            let g: Vec<Rat> = (0..=3).map(|_| random_rat(&mut rng)).collect();
            let f = polynomial_of_inner_form(&g, &a).unwrap();
            let report = localization_check(&f).unwrap();
            assert!(report.q_closed, "case {case}: not Q-closed");
            assert!(report.localized, "case {case}: ∫F != F_b(0)");
            assert_eq!(report.integral, g[0], "case {case}: value");
        }
    });
}

#[test]
fn criterion_9_calculus_battery() {
    run_criterion(9, "calculus battery with deterministic transcript", 60.0, || {
        let first = run_battery(424242);
        for report in &first {
            assert!(report.passed, "{} failed: {}", report.name, report.detail);
        }
        // the named calculus properties each ran at least 100 instances
        for name in [
            "grassmann/anticommutation",
            "grassmann/graded-commutation",
            "grassmann/leibniz",
            "grassmann/translation-invariance",
            "grassmann/change-of-variables",
            "grassmann/fubini",
        ] {
            let report = first.iter().find(|r| r.name == name).expect("property present");
            assert!(report.cases >= 100, "{name} ran only {} cases", report.cases);
        }
        // identical transcript on a second run
        let second = run_battery(424242);
        let render = |reports: &[berezin::verify::PropertyReport]| {
            reports
                .iter()
                .map(|r| format!("{}|{}|{}|{}", r.name, r.passed, r.cases, r.detail))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(render(&first), render(&second), "transcript not deterministic");
    });
}
