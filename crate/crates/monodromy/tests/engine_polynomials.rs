//! Integration of the numeric engine with the constructed polynomials:
//! level-1 generators, wreath recursions, and level-2 cross-validation.

use monodromy::automaton::Automaton;
use monodromy::construct::{build_conservative_cubic, build_f, build_g, build_h};
use monodromy::engine::{
    default_base_point, extract_wreath_recursion, infinity_cycle_check, monodromy_generators,
    EngineConfig,
};
use monodromy::group::GeneratedGroup;
use monodromy::perm::Perm;

fn p6(s: &str) -> Perm {
    Perm::parse(6, s).unwrap()
}

#[test]
fn f_level_one_generators_match() {
    let f = build_f();
    let cfg = EngineConfig::default();
    let base = default_base_point(&f, 1, &cfg).unwrap();
    assert!(base > 1.0 && base < 2.0, "base {base} outside (1, 2)");
    let data = monodromy_generators(&f, base, 1, &cfg).unwrap();
    assert_eq!(data.punctures.len(), 3);
    assert_eq!(data.generators[0], p6("(1 2)(5 6)")); // loop around 0
    assert_eq!(data.generators[1], p6("(3 4)")); // loop around 1
    assert_eq!(data.generators[2], p6("(2 3)(4 5)")); // loop around 2
    assert!(infinity_cycle_check(&data.generators).found);

    let group = GeneratedGroup::new(6, data.generators.clone()).unwrap();
    assert!(group.order() < 720);
}

#[test]
fn g_level_one_generates_full_symmetric_group() {
    let g = build_g().unwrap();
    let cfg = EngineConfig::default();
    let base = default_base_point(&g.poly, 1, &cfg).unwrap();
    assert!(base > 0.0 && base < 1.0, "base {base} outside (0, 1)");
    let data = monodromy_generators(&g.poly, base, 1, &cfg).unwrap();
    assert_eq!(data.punctures.len(), 3);
    // Punctures ascending: c₁ < 0 < 1.
    assert_eq!(data.generators[0], p6("(1 2)")); // loop around c₁
    assert_eq!(data.generators[1], p6("(3 4)(5 6)")); // loop around 0
    assert_eq!(data.generators[2], p6("(2 3)(4 5)")); // loop around 1
    let group = GeneratedGroup::new(6, data.generators.clone()).unwrap();
    assert_eq!(group.order(), 720);
}

#[test]
fn h_wreath_recursion_matches_expected() {
    let built = build_h().unwrap();
    let cfg = EngineConfig::default();
    let data = monodromy_generators(&built.solved.poly, built.recommended_base, 1, &cfg).unwrap();
    assert_eq!(data.punctures.len(), 4);
    eprintln!("h level-1 generators:");
    for (u, g) in data.punctures.iter().zip(&data.generators) {
        eprintln!("  puncture {u:.6}: {g}");
    }

    let extracted =
        extract_wreath_recursion(&built.solved.poly, built.recommended_base, &cfg).unwrap();
    eprintln!("extracted automaton:\n{}", extracted.automaton);

    let expected = Automaton::parse(
        6,
        "g1 = <id, g1, id, id, id, g4> (1 2)(5 6)\n\
         g2 = <id, id, id, g3, id, id> (3 4)\n\
         g3 = <id, g2, id, id, id, id>\n\
         g4 = <id, id, id, id, id, id> (2 3)(4 5)",
    )
    .unwrap();
    for (k, &sid) in extracted.state_ids.iter().enumerate() {
        let exp_id = expected.state_id(&format!("g{}", k + 1)).unwrap();
        let got = extracted.automaton.state(sid);
        let want = expected.state(exp_id);
        assert_eq!(got.root, want.root, "root of generator {}", k + 1);
        for i in 0..6 {
            let got_word: Vec<(usize, bool)> = got.children[i]
                .iter()
                .map(|s| (s.id, s.inverse))
                .collect();
            let want_word: Vec<(usize, bool)> = want.children[i]
                .iter()
                .map(|s| (s.id, s.inverse))
                .collect();
            assert_eq!(
                got_word,
                want_word,
                "entry {} of generator {} differs: got {:?} want {:?}",
                i + 1,
                k + 1,
                extracted.automaton.state_line(sid),
                expected.state_line(exp_id),
            );
        }
    }
}

#[test]
fn conservative_cubic_monodromy_is_symmetric() {
    let solved = build_conservative_cubic().unwrap();
    let cfg = EngineConfig::default();
    let base = default_base_point(&solved.poly, 1, &cfg).unwrap();
    let data = monodromy_generators(&solved.poly, base, 1, &cfg).unwrap();
    let group = GeneratedGroup::new(3, data.generators.clone()).unwrap();
    assert_eq!(group.order(), 6);
}

#[test]
fn h_level_one_generators_exact() {
    let built = build_h().unwrap();
    let cfg = EngineConfig::default();
    let data = monodromy_generators(&built.solved.poly, built.recommended_base, 1, &cfg).unwrap();
    assert_eq!(data.punctures.len(), 4);
    assert_eq!(data.generators[0], p6("(1 2)(5 6)")); // around 0
    assert_eq!(data.generators[1], p6("(3 4)")); // around a
    assert!(data.generators[2].is_identity()); // around b
    assert_eq!(data.generators[3], p6("(2 3)(4 5)")); // around 2
}

#[test]
fn h_level_two_has_full_36_cycle() {
    let built = build_h().unwrap();
    let cfg = EngineConfig::default();
    let extracted =
        extract_wreath_recursion(&built.solved.poly, built.recommended_base, &cfg).unwrap();
    let unrolled = extracted.automaton.unroll_all(2);
    let gens: Vec<Perm> = extracted
        .state_ids
        .iter()
        .map(|&i| unrolled[i].clone())
        .collect();
    let report = infinity_cycle_check(&gens);
    assert!(report.found);
    assert_eq!(report.order, 36);
}

#[test]
fn conservative_cubic_level_two_blocks_close_to_full() {
    use monodromy::blocks::{verify_main3, BlockConfig};
    use monodromy::tree::TreeShape;
    let solved = build_conservative_cubic().unwrap();
    let cfg = EngineConfig::default();
    let base = default_base_point(&solved.poly, 2, &cfg).unwrap();
    let extracted = extract_wreath_recursion(&solved.poly, base, &cfg).unwrap();
    let unrolled = extracted.automaton.unroll_all(2);
    let gens: Vec<Perm> = extracted
        .state_ids
        .iter()
        .map(|&i| unrolled[i].clone())
        .collect();
    let shape = TreeShape::new(3, 2);
    let report = verify_main3(&shape, &gens, &BlockConfig::default()).unwrap();
    assert!(report.holds);
    assert_eq!(report.pairs_checked, 27); // 3 branch pairs × 3 × 3 points
}

#[test]
fn level_one_cycle_types_match_portrait_predictions() {
    use monodromy::hurwitz::generator_cycle_type;
    use monodromy::poly::{critical_data, RootConfig};
    let f = build_f();
    let g = build_g().unwrap();
    let h = build_h().unwrap();
    let cfg = EngineConfig::default();
    for (poly, base) in [
        (f, None),
        (g.poly.clone(), None),
        (h.solved.poly.clone(), Some(h.recommended_base)),
    ] {
        let base = base.unwrap_or_else(|| default_base_point(&poly, 1, &cfg).unwrap());
        let data = monodromy_generators(&poly, base, 1, &cfg).unwrap();
        let crit = critical_data(&poly, 8, &RootConfig::default()).unwrap();
        // Match each critical value to its loop generator by puncture
        // position; post-critical-only punctures predict the identity.
        for (u, perm) in data.punctures.iter().zip(&data.generators) {
            let predicted = crit
                .values
                .iter()
                .find(|(v, _)| (v.re - u).abs() < 1e-6)
                .map(|(_, degs)| generator_cycle_type(degs, poly.degree()))
                .unwrap_or_else(|| vec![1; poly.degree()]);
            assert_eq!(perm.cycle_type(), predicted, "puncture {u}");
        }
    }
}

#[test]
fn preimage_trees_of_f_and_h() {
    use monodromy::poly::{preimage_tree, RootConfig};
    use num_complex::Complex64;
    let f = build_f();
    let tree = preimage_tree(&f, Complex64::new(1.5, 0.0), 1, &RootConfig::default()).unwrap();
    let fiber = &tree.levels[1];
    assert_eq!(fiber.len(), 6);
    for z in fiber {
        assert!(z.im.abs() < 1e-9, "non-real preimage {z}");
    }
    let mut res: Vec<f64> = fiber.iter().map(|z| z.re).collect();
    let sorted = {
        let mut s = res.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s
    };
    res.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(res, sorted);

    let h = build_h().unwrap();
    let tree = preimage_tree(
        &h.solved.poly,
        Complex64::new(h.recommended_base, 0.0),
        2,
        &RootConfig::default(),
    )
    .unwrap();
    assert_eq!(tree.levels[2].len(), 36);
    let non_real = tree.levels[2].iter().filter(|z| z.im.abs() > 1e-6).count();
    assert!(non_real > 0, "expected some non-real second preimages");
}

#[test]
fn labeled_fiber_matches_preimage_tree() {
    use monodromy::poly::{preimage_tree, RootConfig};
    use num_complex::Complex64;
    let h = build_h().unwrap();
    let cfg = EngineConfig::default();
    let data = monodromy_generators(&h.solved.poly, h.recommended_base, 2, &cfg).unwrap();
    let tree = preimage_tree(
        &h.solved.poly,
        Complex64::new(h.recommended_base, 0.0),
        2,
        &RootConfig::default(),
    )
    .unwrap();
    // The labels and the tree solve the same fibers by different routes;
    // every labeled point must coincide with exactly one tree point.
    for labeled in &data.labels.levels[2] {
        let hits = tree.levels[2]
            .iter()
            .filter(|z| (*z - labeled).norm() < 1e-6)
            .count();
        assert_eq!(hits, 1, "labeled point {labeled} has {hits} matches");
    }
}

#[test]
fn f_automaton_level_one_truncation_matches_direct_monodromy() {
    let f = build_f();
    let cfg = EngineConfig::default();
    let base = default_base_point(&f, 1, &cfg).unwrap();
    let extracted = extract_wreath_recursion(&f, base, &cfg).unwrap();
    let direct = monodromy_generators(&f, base, 1, &cfg).unwrap();
    let unrolled = extracted.automaton.unroll_all(1);
    for (k, &sid) in extracted.state_ids.iter().enumerate() {
        assert_eq!(unrolled[sid], direct.generators[k]);
    }
}

#[test]
fn quartic_power_map_level_two_is_cyclic_sixteen() {
    use monodromy::poly::Poly;
    // Level 2 of z⁴ exercises the canonical-label fallback below level 1:
    // the action is generated by a full 16-cycle.
    let p = Poly::monomial(4);
    let cfg = EngineConfig::default();
    let base = default_base_point(&p, 2, &cfg).unwrap();
    let data = monodromy_generators(&p, base, 2, &cfg).unwrap();
    assert!(!data.labels.real_convention);
    assert_eq!(data.generators.len(), 1);
    assert!(data.generators[0].is_full_cycle());
    assert_eq!(data.generators[0].degree(), 16);
    let g = GeneratedGroup::new(16, data.generators.clone()).unwrap();
    assert_eq!(g.order(), 16);
}

#[test]
fn basilica_quadratic_extraction_generalizes() {
    use monodromy::blocks::{verify_main1, BlockConfig};
    use monodromy::poly::Poly;
    use monodromy::tree::TreeShape;
    // z² − 1: the critical orbit is the two-cycle 0 → −1 → 0, so the
    // post-critical set {−1, 0} is finite and real.
    let p = Poly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
    let cfg = EngineConfig::default();
    let base = default_base_point(&p, 1, &cfg).unwrap();
    let extracted = extract_wreath_recursion(&p, base, &cfg).unwrap();
    assert_eq!(extracted.punctures.len(), 2);

    for level in 1..=3 {
        let unrolled = extracted.automaton.unroll_all(level);
        let gens: Vec<Perm> = extracted
            .state_ids
            .iter()
            .map(|&i| unrolled[i].clone())
            .collect();
        // The loop around infinity acts as a full cycle at every level.
        assert!(infinity_cycle_check(&gens).found, "level {level}");
        // Prime degree: every block is a single branch.
        let shape = TreeShape::new(2, level);
        let report = verify_main1(&shape, &gens, &BlockConfig::default()).unwrap();
        assert!(report.claim_holds && report.all_branches, "level {level}");
    }
    // Direct level-2 lifting agrees with the unrolling.
    let direct = monodromy_generators(&p, base, 2, &cfg).unwrap();
    let unrolled = extracted.automaton.unroll_all(2);
    for (k, &sid) in extracted.state_ids.iter().enumerate() {
        assert_eq!(unrolled[sid], direct.generators[k]);
    }
}

#[test]
fn chebyshev_quadratic_extraction_generalizes() {
    use monodromy::poly::Poly;
    // z² − 2: critical orbit 0 → −2 → 2 → 2, post-critical {−2, 2}.
    let p = Poly::from_real(&[-2.0, 0.0, 1.0]).unwrap();
    let cfg = EngineConfig::default();
    let base = default_base_point(&p, 1, &cfg).unwrap();
    assert!(base > -2.0 && base < 2.0);
    let extracted = extract_wreath_recursion(&p, base, &cfg).unwrap();
    assert_eq!(extracted.punctures.len(), 2);
    let direct = monodromy_generators(&p, base, 2, &cfg).unwrap();
    let unrolled = extracted.automaton.unroll_all(2);
    for (k, &sid) in extracted.state_ids.iter().enumerate() {
        assert_eq!(unrolled[sid], direct.generators[k]);
    }
    // The level-2 group of a real quadratic with this orbit is dihedral on
    // the 4-point cycle: order 8 at most, and transitive.
    let g = GeneratedGroup::new(4, direct.generators.clone()).unwrap();
    assert!(g.is_transitive());
    assert!(g.order() <= 8);
}

#[test]
fn wreath_entries_of_named_examples_are_single_letters() {
    let f = build_f();
    let g = build_g().unwrap();
    let h = build_h().unwrap();
    let cfg = EngineConfig::default();
    for (name, poly, base) in [
        ("f", f, None),
        ("g", g.poly.clone(), None),
        ("h", h.solved.poly.clone(), Some(h.recommended_base)),
    ] {
        let base = base.unwrap_or_else(|| default_base_point(&poly, 1, &cfg).unwrap());
        let extracted = extract_wreath_recursion(&poly, base, &cfg).unwrap();
        for &sid in &extracted.state_ids {
            for (i, word) in extracted.automaton.state(sid).children.iter().enumerate() {
                assert!(
                    word.len() <= 1,
                    "{name}: entry {} of {} has length {}",
                    i + 1,
                    extracted.automaton.state(sid).name,
                    word.len()
                );
                assert!(
                    word.iter().all(|s| !s.inverse),
                    "{name}: inverse letter in a counterclockwise extraction"
                );
            }
        }
    }
}
