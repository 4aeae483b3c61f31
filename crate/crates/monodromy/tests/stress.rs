//! Stress and error-path coverage beyond the per-module unit tests.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use monodromy::automaton::Automaton;
use monodromy::engine::{homotopy_word, EngineConfig, EngineError};
use monodromy::group::GeneratedGroup;
use monodromy::hurwitz::{enumerate_tuples, CriticalPortrait};
use monodromy::path::{Piece, PlanePath};
use monodromy::poly::{continue_fiber, ContinuationConfig, NumericError, Poly};
use monodromy::tree::TreeShape;

#[test]
fn stabilizer_chain_matches_closure_on_tree_groups() {
    // Unrolled tree-automorphism groups have rich stabilizer structure;
    // their closures stay enumerable at these sizes.
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for (d, n) in [(2usize, 3usize), (3, 2), (2, 4), (4, 2)] {
        let shape = TreeShape::new(d, n);
        for trial in 0..5 {
            let (machine, sid) = Automaton::adding_machine(d);
            let mut gens = vec![machine.unroll(sid, n)];
            let (a, s) = Automaton::random_automorphism(&shape, &mut rng, &format!("s{trial}_"));
            gens.push(a.unroll(s, n));
            let g = GeneratedGroup::new(shape.level_size(), gens)
                .unwrap()
                .with_closure_cap(200_000);
            if let Ok(elems) = g.closure() {
                assert_eq!(
                    elems.len() as u128,
                    g.order_via_stabilizer_chain(),
                    "d={d} n={n} trial={trial}"
                );
            }
        }
    }
}

#[test]
fn degree_seven_portraits_enumerate() {
    // Fully ramified: a single 7-cycle generator, cyclic class.
    let p = CriticalPortrait::new(7, vec![vec![7]]).unwrap();
    let e = enumerate_tuples(&p).unwrap();
    assert_eq!(e.classes.len(), 1);
    assert_eq!(e.classes[0].group_order, 7);

    // Two triple-transposition values: every class is transitive with a
    // full-cycle product.
    let p = CriticalPortrait::new(7, vec![vec![2, 2, 2], vec![2, 2, 2]]).unwrap();
    let e = enumerate_tuples(&p).unwrap();
    assert!(!e.classes.is_empty());
    for rep in &e.reps {
        let g = GeneratedGroup::new(7, rep.clone()).unwrap();
        assert!(g.is_transitive());
    }
}

#[test]
fn continuation_underflows_through_a_critical_value() {
    // z²: the segment from 1 to −1 passes straight through the critical
    // value 0, where the fiber collides; the step controller must bottom
    // out rather than jump across.
    let p = Poly::monomial(2);
    let path = PlanePath::new(vec![Piece::segment(
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    )]);
    let start = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
    let result = continue_fiber(&p, 1, &path, &start, &ContinuationConfig::default());
    assert!(matches!(result, Err(NumericError::StepUnderflow { .. })));
}

#[test]
fn ambiguous_ray_crossing_is_an_error() {
    // A polyline segment that crosses exactly at the puncture itself.
    let cfg = EngineConfig::default();
    let polyline = vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)];
    let result = homotopy_word(&polyline, &[0.0], cfg.ray_angle, 1e-9);
    assert!(matches!(result, Err(EngineError::AmbiguousCrossing(0))));
}

#[test]
fn homotopy_word_commutator_does_not_reduce() {
    // Nested loops around two punctures in a b a⁻¹ b⁻¹ order: the free
    // reduction must keep all four letters.
    use monodromy::path::{build_loop, Orientation};
    let punctures = [0.0, 2.0];
    let cfg = EngineConfig::default();
    let a = build_loop(&punctures, 1.0, 0.0, 0.1, Orientation::Ccw).unwrap();
    let b = build_loop(&punctures, 1.0, 2.0, 0.1, Orientation::Ccw).unwrap();
    let a_inv = a.reversed();
    let b_inv = b.reversed();
    let mut polyline = a.sample(cfg.samples_per_piece);
    polyline.extend(b.sample(cfg.samples_per_piece));
    polyline.extend(a_inv.sample(cfg.samples_per_piece));
    polyline.extend(b_inv.sample(cfg.samples_per_piece));
    let word = homotopy_word(&polyline, &punctures, cfg.ray_angle, 1e-9).unwrap();
    assert_eq!(
        word,
        vec![(0usize, 1i8), (1, 1), (0, -1), (1, -1)],
        "commutator must survive reduction"
    );
}

#[test]
fn complex_coefficient_roots() {
    // (z − i)(z + 2i)(z − 1): complex coefficients, no real structure.
    let i = Complex64::new(0.0, 1.0);
    let factors = [i, -2.0 * i, Complex64::new(1.0, 0.0)];
    let mut p = Poly::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
    for r in factors {
        p = p.mul(&Poly::new(vec![-r, Complex64::new(1.0, 0.0)]).unwrap());
    }
    let roots = monodromy::poly::all_roots(&p, &Default::default()).unwrap();
    assert_eq!(roots.len(), 3);
    for r in factors {
        assert!(
            roots.iter().any(|found| (found.value - r).norm() < 1e-9),
            "missing root {r}"
        );
    }
}
