//! The acceptance suite: each criterion is an executable check returning a
//! pass/fail outcome with measured values, runnable from the CLI or the
//! integration tests.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Automaton, StateId};
use crate::blocks::{
    block_lattice_at, fatou_oracle, is_prime, minimal_block, power_map_blocks,
    verify_main1, verify_main3, BlockConfig,
};
use crate::conservative::{random_system, CycleSystem};
use crate::construct::{build_conservative_cubic, build_f, build_g, build_h};
use crate::engine::{
    default_base_point, extract_wreath_recursion, monodromy_generators,
    EngineConfig, ExtractedAutomaton,
};
use crate::group::GeneratedGroup;
use crate::hurwitz::{all_portraits, portrait_determines_group, CriticalPortrait};
use crate::perm::Perm;
use crate::poly::Poly;
use crate::tree::TreeShape;

/// Suite-wide knobs: the rng seed for the randomized criteria and the
/// breadth-first closure cap (orders fall back to the stabilizer chain
/// beyond it).
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub closure_cap: usize,
    pub orientation: crate::path::Orientation,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0xacce97,
            closure_cap: crate::group::DEFAULT_CLOSURE_CAP,
            orientation: crate::path::Orientation::Ccw,
        }
    }
}

impl VerifyConfig {
    fn engine(&self) -> EngineConfig {
        EngineConfig {
            orientation: self.orientation,
            ..EngineConfig::default()
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionOutcome {
    pub index: usize,
    pub name: String,
    pub passed: bool,
    pub details: String,
    /// Wall-clock measurement; excluded from JSON so that fixed-seed runs
    /// serialize byte-identically.
    #[serde(skip)]
    pub millis: u128,
}

fn outcome(index: usize, name: &str, start: Instant, result: Result<String, String>) -> CriterionOutcome {
    let (passed, details) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CriterionOutcome {
        index,
        name: name.to_string(),
        passed,
        details,
        millis: start.elapsed().as_millis(),
    }
}

/// The wreath recursion the degree-6 two-cycle example must produce, with
/// generator k encircling the k-th puncture in ascending order.
pub fn expected_h_automaton() -> Automaton {
    Automaton::parse(
        6,
        "g1 = <id, g1, id, id, id, g4> (1 2)(5 6)\n\
         g2 = <id, id, id, g3, id, id> (3 4)\n\
         g3 = <id, g2, id, id, id, id>\n\
         g4 = <id, id, id, id, id, id> (2 3)(4 5)",
    )
    .expect("fixture parses")
}

/// The nine four-point classes of the level-2 partition preserved by the
/// degree-6 two-cycle example, as flat indices.
pub fn expected_level_two_partition(shape: &TreeShape) -> Vec<BTreeSet<usize>> {
    let idx = |i: usize, j: usize| shape.index_of(&[i, j]).expect("valid word");
    let mut blocks = Vec::new();
    for i in [2usize, 3] {
        for j in [1usize, 2, 3] {
            blocks.push(BTreeSet::from([
                idx(i, j),
                idx(i, 7 - j),
                idx(7 - i, 4 - j),
                idx(7 - i, 3 + j),
            ]));
        }
    }
    blocks.push(BTreeSet::from([idx(1, 1), idx(1, 6), idx(6, 2), idx(6, 5)]));
    blocks.push(BTreeSet::from([idx(1, 2), idx(1, 5), idx(6, 3), idx(6, 4)]));
    blocks.push(BTreeSet::from([idx(1, 3), idx(1, 4), idx(6, 1), idx(6, 6)]));
    blocks
}

fn automata_equal(got: &ExtractedAutomaton, want: &Automaton) -> bool {
    let ids: Vec<StateId> = got.state_ids.clone();
    if ids.len() + 1 != want.states().len() {
        return false;
    }
    for (k, &sid) in ids.iter().enumerate() {
        let want_id = match want.state_id(&format!("g{}", k + 1)) {
            Some(id) => id,
            None => return false,
        };
        let a = got.automaton.state(sid);
        let b = want.state(want_id);
        if a.root != b.root || a.children.len() != b.children.len() {
            return false;
        }
        for (wa, wb) in a.children.iter().zip(&b.children) {
            if wa.len() != wb.len() {
                return false;
            }
            // State ids in both automata are 1-based in puncture order.
            for (sa, sb) in wa.iter().zip(wb) {
                if sa.id != sb.id || sa.inverse != sb.inverse {
                    return false;
                }
            }
        }
    }
    true
}

/// Criterion 1: the closed-form degree-6 composite reproduces its level-1
/// generators, pair blocks, and a proper subgroup of S6.
pub fn criterion_1(vcfg: &VerifyConfig) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let f = build_f();
        // Defining values hold to 1e-9.
        let critical = crate::construct::f_critical_points();
        let fv = |x: f64| f.eval(num_complex::Complex64::new(x, 0.0)).re;
        let residual = [
            fv(critical[0]),
            fv(critical[1]) - 2.0,
            fv(critical[2]) - 1.0,
            fv(critical[3]) - 2.0,
            fv(critical[4]),
        ]
        .iter()
        .map(|r| r.abs())
        .fold(0.0, f64::max);
        if residual >= 1e-9 {
            return Err(format!("construction residual {residual:.2e} above 1e-9"));
        }
        let cfg = vcfg.engine();
        let base = default_base_point(&f, 1, &cfg).map_err(|e| e.to_string())?;
        if !(1.0 < base && base < 2.0) {
            return Err(format!("auto base {base} not in (1, 2)"));
        }
        let data = monodromy_generators(&f, base, 1, &cfg).map_err(|e| e.to_string())?;
        let want = [
            Perm::parse(6, "(1 2)(5 6)").expect("perm"),
            Perm::parse(6, "(3 4)").expect("perm"),
            Perm::parse(6, "(2 3)(4 5)").expect("perm"),
        ];
        if data.generators.len() != 3 {
            return Err(format!("expected 3 generators, got {}", data.generators.len()));
        }
        for (g, w) in data.generators.iter().zip(&want) {
            if g != w {
                return Err(format!("generator {g} differs from expected {w}"));
            }
        }
        let group = GeneratedGroup::new(6, data.generators.clone())
            .expect("degree 6")
            .with_closure_cap(vcfg.closure_cap);
        let lattice =
            block_lattice_at(&group, 1, &BlockConfig::default()).map_err(|e| e.to_string())?;
        if !lattice.contains(&BTreeSet::from([1, 6])) {
            return Err("block {1,6} missing from the lattice".to_string());
        }
        for pair in [[2usize, 5], [3, 4]] {
            let block = minimal_block(&group, &BTreeSet::from_iter(pair))
                .map_err(|e| e.to_string())?;
            if block != BTreeSet::from_iter(pair) {
                return Err(format!("{pair:?} is not a block"));
            }
        }
        // Closure is the primary oracle; under a tiny cap the order falls
        // back to the stabilizer chain.
        let order = group.order();
        if order >= 720 {
            return Err(format!("group order {order} not below 720"));
        }
        if let Ok(elems) = group.closure() {
            if elems.len() as u128 != group.order_via_stabilizer_chain() {
                return Err("closure and stabilizer-chain orders disagree".to_string());
            }
        }
        Ok(format!(
            "generators exact, blocks {{1,6}},{{2,5}},{{3,4}} present, order {order} < 720, residual {residual:.1e}, base {base:.4}"
        ))
    })();
    outcome(1, "f reproduction", start, result)
}

/// Criterion 2: the Newton-solved sibling polynomial has full symmetric
/// monodromy of order 720.
pub fn criterion_2(vcfg: &VerifyConfig) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let g = build_g().map_err(|e| e.to_string())?;
        let cfg = vcfg.engine();
        let base = default_base_point(&g.poly, 1, &cfg).map_err(|e| e.to_string())?;
        let data = monodromy_generators(&g.poly, base, 1, &cfg).map_err(|e| e.to_string())?;
        let group = GeneratedGroup::new(6, data.generators.clone())
            .expect("degree 6")
            .with_closure_cap(vcfg.closure_cap);
        let order = group.order();
        if order != 720 {
            return Err(format!("order {order}, expected 720"));
        }
        Ok(format!(
            "order 720 with generators {}",
            data.generators
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ))
    })();
    outcome(2, "g reproduction", start, result)
}

/// Criterion 3: the two-cycle example solves, its extracted automaton is
/// the expected recursion exactly, the level-2 action admits the nine-block
/// partition, and the minimal block around the two distinguished points has
/// exactly four elements.
pub fn criterion_3(vcfg: &VerifyConfig) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let built = build_h().map_err(|e| e.to_string())?;
        let cfg = vcfg.engine();
        let extracted = extract_wreath_recursion(&built.solved.poly, built.recommended_base, &cfg)
            .map_err(|e| e.to_string())?;
        let expected = expected_h_automaton();
        if !automata_equal(&extracted, &expected) {
            return Err(format!(
                "extracted automaton differs:\n{}\nexpected:\n{}",
                extracted.automaton, expected
            ));
        }
        let shape = TreeShape::new(6, 2);
        let perms = extracted.automaton.unroll_all(2);
        let gens: Vec<Perm> = extracted
            .state_ids
            .iter()
            .map(|&i| perms[i].clone())
            .collect();
        // Every class of the expected partition is preserved or moved off
        // itself wholesale by every generator.
        let partition = expected_level_two_partition(&shape);
        let all: BTreeSet<usize> = partition.iter().flatten().cloned().collect();
        if all.len() != 36 {
            return Err("partition does not cover the 36 points".to_string());
        }
        for block in &partition {
            for g in &gens {
                let image: BTreeSet<usize> = block.iter().map(|&x| g.apply(x)).collect();
                let inter = image.intersection(block).count();
                if !(inter == 0 || image == *block) {
                    return Err(format!("partition class {block:?} broken by {g}"));
                }
            }
        }
        let group = GeneratedGroup::new(36, gens).expect("degree 36");
        let seed = BTreeSet::from([
            shape.index_of(&[3, 2]).expect("word"),
            shape.index_of(&[4, 2]).expect("word"),
        ]);
        let oracle = fatou_oracle(&shape, &group, &seed).map_err(|e| e.to_string())?;
        if oracle.block_size != 4 {
            return Err(format!("minimal block size {}, expected 4", oracle.block_size));
        }
        if oracle.exceeds {
            return Err("block unexpectedly exceeds 6".to_string());
        }
        Ok(format!(
            "automaton exact, nine 4-blocks preserved, minimal block of {{32,42}} has 4 < 7 elements, b−1 = {:.2e}",
            built.b_offset_from_one
        ))
    })();
    outcome(3, "h reproduction", start, result)
}

/// Criterion 4: for each constructed polynomial, direct level-2 lifting
/// equals the level-2 unrolling of the extracted automaton, generator by
/// generator.
pub fn criterion_4(vcfg: &VerifyConfig) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let cfg = vcfg.engine();
        let mut checked = Vec::new();
        let f = build_f();
        let g = build_g().map_err(|e| e.to_string())?;
        let h = build_h().map_err(|e| e.to_string())?;
        let cases: Vec<(&str, Poly, Option<f64>)> = vec![
            ("f", f, None),
            ("g", g.poly.clone(), None),
            ("h", h.solved.poly.clone(), Some(h.recommended_base)),
        ];
        for (name, poly, base_override) in cases {
            let base = match base_override {
                Some(b) => b,
                None => default_base_point(&poly, 2, &cfg).map_err(|e| e.to_string())?,
            };
            let extracted =
                extract_wreath_recursion(&poly, base, &cfg).map_err(|e| e.to_string())?;
            let direct = monodromy_generators(&poly, base, 2, &cfg).map_err(|e| e.to_string())?;
            if extracted.punctures.len() != direct.punctures.len() {
                return Err(format!("{name}: puncture sets differ"));
            }
            let unrolled = extracted.automaton.unroll_all(2);
            for (k, &sid) in extracted.state_ids.iter().enumerate() {
                if unrolled[sid] != direct.generators[k] {
                    return Err(format!(
                        "{name}: generator {} level-2 mismatch: unrolled {} vs lifted {}",
                        k + 1,
                        unrolled[sid],
                        direct.generators[k]
                    ));
                }
            }
            checked.push(name);
        }
        Ok(format!(
            "level-2 lifting equals unrolling for {}",
            checked.join(", ")
        ))
    })();
    outcome(4, "level-2 cross-validation", start, result)
}

/// Criterion 5: every valid portrait of degree ≤ 5 determines its group,
/// and the degree-5 groups follow the transposition/cycle case analysis.
pub fn criterion_5() -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let mut portrait_count = 0usize;
        for degree in 2..=5usize {
            for portrait in all_portraits(degree) {
                portrait_count += 1;
                let report = portrait_determines_group(&portrait).map_err(|e| e.to_string())?;
                if !report.determined {
                    return Err(format!("portrait {portrait} does not determine its group"));
                }
                if degree == 5 {
                    let order = report.classes[0].group_order;
                    let expected = expected_degree5_order(&portrait);
                    if order != expected {
                        return Err(format!(
                            "portrait {portrait}: order {order}, case analysis expects {expected}"
                        ));
                    }
                }
            }
        }
        Ok(format!(
            "{portrait_count} portraits of degree ≤ 5 all determined; degree-5 orders match the case analysis"
        ))
    })();
    outcome(5, "portraits of degree ≤ 5 determine the group", start, result)
}

/// The degree-5 case analysis: a simple critical point alone over a value
/// forces S5; one fully ramified value gives C5; two values of shapes from
/// {(3), (2,2)} give A5 when a 3-cycle is present and D5 otherwise; any
/// transposition generator also forces S5.
fn expected_degree5_order(portrait: &CriticalPortrait) -> u128 {
    if portrait.values.iter().any(|v| v == &vec![2]) {
        return 120;
    }
    if portrait.values.len() == 1 && portrait.values[0] == vec![5] {
        return 5;
    }
    if portrait.values.len() == 2
        && portrait
            .values
            .iter()
            .all(|v| v == &vec![3] || v == &vec![2, 2])
    {
        if portrait.values.iter().any(|v| v == &vec![3]) {
            return 60;
        }
        return 10;
    }
    // Remaining shapes ((4),(2)… handled above by the transposition rule;
    // (3,2) with (2) likewise): anything left contains an odd generator and
    // acts primitively, hence S5.
    120
}

/// Criterion 6: the degree-6 portrait with two double-critical values and a
/// simple one is ambiguous: at least two group classes, one of order 720
/// and one imprimitive with a three-class block system.
pub fn criterion_6() -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let portrait = CriticalPortrait::new(6, vec![vec![2, 2], vec![2, 2], vec![2]])
            .map_err(|e| e.to_string())?;
        let report = portrait_determines_group(&portrait).map_err(|e| e.to_string())?;
        if report.determined {
            return Err("portrait unexpectedly determined".to_string());
        }
        let has_720 = report.classes.iter().any(|c| c.group_order == 720);
        let has_blocked = report.classes.iter().any(|c| {
            c.group_order < 720
                && c.proper_block_sizes
                    .as_ref()
                    .is_some_and(|s| s.len() == 3 && s.iter().all(|&x| x == 2))
        });
        if !has_720 {
            return Err("no class of order 720".to_string());
        }
        if !has_blocked {
            return Err("no imprimitive class with a 3-class block system".to_string());
        }
        Ok(format!(
            "{} tuple classes, {} group-conjugacy classes; orders include 720 and an imprimitive class with three 2-point blocks",
            report.class_count, report.group_conjugacy_classes
        ))
    })();
    outcome(6, "degree-6 portrait ambiguity", start, result)
}

fn suite_shapes() -> Vec<(usize, usize)> {
    vec![
        (2, 2),
        (2, 3),
        (3, 2),
        (3, 3),
        (4, 2),
        (4, 3),
        (5, 2),
        (8, 2),
        (9, 2),
    ]
}

/// Random full-cycle-containing subgroup of Aut(T_n): the odometer plus a
/// few random portrait automorphisms, as unrolled permutations.
fn random_full_cycle_group(shape: &TreeShape, rng: &mut ChaCha8Rng) -> Vec<Perm> {
    let (machine, sid) = Automaton::adding_machine(shape.degree);
    let mut gens = vec![machine.unroll(sid, shape.height)];
    for i in 0..2 {
        let (a, s) = Automaton::random_automorphism(shape, rng, &format!("r{i}_"));
        gens.push(a.unroll(s, shape.height));
    }
    gens
}

/// Criterion 7: over 200+ seeded random full-cycle groups of prime-power
/// degree, every block is basic; for prime degree every block is a branch.
pub fn criterion_7(vcfg: &VerifyConfig) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let config = BlockConfig::default();
        let mut trials = 0usize;
        for (d, n) in suite_shapes() {
            let shape = TreeShape::new(d, n);
            for trial in 0..23 {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    vcfg.seed ^ (d as u64) << 32 ^ (n as u64) << 16 ^ trial as u64,
                );
                let gens = random_full_cycle_group(&shape, &mut rng);
                let report = verify_main1(&shape, &gens, &config).map_err(|e| e.to_string())?;
                if !report.all_basic {
                    return Err(format!(
                        "d={d} n={n} trial {trial}: non-basic block {:?}",
                        report.counterexample
                    ));
                }
                if is_prime(d) && !report.all_branches {
                    return Err(format!(
                        "d={d} n={n} trial {trial}: prime degree with a non-branch block"
                    ));
                }
                trials += 1;
            }
        }
        Ok(format!(
            "{trials} random full-cycle groups: all blocks basic, prime degrees all branches"
        ))
    })();
    outcome(7, "prime-power block theorem suite", start, result)
}

/// Criterion 8: over 200+ seeded random groups with certified-primitive
/// level-1 restriction and a full cycle, every cross-branch pair generates
/// the full level as its minimal block.
pub fn criterion_8(vcfg: &VerifyConfig) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let config = BlockConfig::default();
        let mut trials = 0usize;
        for (d, n) in suite_shapes() {
            let shape = TreeShape::new(d, n);
            let mut produced = 0usize;
            let mut attempt = 0u64;
            while produced < 23 {
                attempt += 1;
                if attempt > 2000 {
                    return Err(format!("d={d} n={n}: could not sample primitive groups"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(
                    vcfg.seed ^ 0x51ab ^ (d as u64) << 32 ^ (n as u64) << 16 ^ attempt,
                );
                let gens = random_full_cycle_group(&shape, &mut rng);
                match verify_main3(&shape, &gens, &config) {
                    Ok(report) => {
                        if !report.holds {
                            return Err(format!(
                                "d={d} n={n}: counterexample {:?}",
                                report.counterexample
                            ));
                        }
                        produced += 1;
                        trials += 1;
                    }
                    Err(crate::blocks::BlockError::HypothesisNotMet(_)) => continue,
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
        Ok(format!(
            "{trials} random primitive-level-1 groups: every cross-branch pair closes to the full level"
        ))
    })();
    outcome(8, "primitive level-1 theorem suite", start, result)
}

/// Criterion 9: composite-degree cyclic groups have non-basic blocks of
/// size exactly p^n.
pub fn criterion_9() -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        for (p, q, n) in [(2usize, 3usize, 2usize), (2, 3, 3), (2, 5, 2)] {
            let report = power_map_blocks(p, q, n);
            let expected = p.pow(n as u32);
            if report.block.size != expected {
                return Err(format!(
                    "p={p} q={q} n={n}: block size {} expected {expected}",
                    report.block.size
                ));
            }
            if report.block.class != "non-basic" {
                return Err(format!(
                    "p={p} q={q} n={n}: block class {} expected non-basic",
                    report.block.class
                ));
            }
            if !report.verified_block {
                return Err(format!("p={p} q={q} n={n}: orbit is not a block"));
            }
        }
        Ok("sizes 4/36, 8/216, 4/100 all non-basic verified blocks".to_string())
    })();
    outcome(9, "composite power-map blocks", start, result)
}

/// Criterion 10: 500 random conservative systems are doubly transitive with
/// correct witness words for every admissible triple; the numeric cubic has
/// full symmetric monodromy.
pub fn criterion_10(vcfg: &VerifyConfig) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(vcfg.seed ^ 0xc0de);
        let mut triples = 0usize;
        for trial in 0..500 {
            let d = 3 + (trial % 7);
            let system: CycleSystem = random_system(d, &mut rng);
            if !system.check_doubly_transitive().map_err(|e| e.to_string())? {
                return Err(format!("system {system} is not doubly transitive"));
            }
            for a in 1..=d {
                for b in 1..=d {
                    for c in 1..=d {
                        if a == b || c == b {
                            continue;
                        }
                        let word = system.witness(a, b, c).map_err(|e| e.to_string())?;
                        let g = system.evaluate_word(&word);
                        if g.apply(a) != c || g.apply(b) != b {
                            return Err(format!(
                                "witness failed on {system} with ({a},{b},{c})"
                            ));
                        }
                        triples += 1;
                    }
                }
            }
        }
        let cubic = build_conservative_cubic().map_err(|e| e.to_string())?;
        let cfg = vcfg.engine();
        let base = default_base_point(&cubic.poly, 1, &cfg).map_err(|e| e.to_string())?;
        let data = monodromy_generators(&cubic.poly, base, 1, &cfg).map_err(|e| e.to_string())?;
        let order = GeneratedGroup::new(3, data.generators.clone())
            .expect("degree 3")
            .order();
        if order != 6 {
            return Err(format!("cubic monodromy order {order}, expected 6"));
        }
        Ok(format!(
            "500 systems doubly transitive, {triples} witness triples verified, cubic monodromy is S3"
        ))
    })();
    outcome(10, "conservative double-transitivity suite", start, result)
}

/// Criterion 11: monodromy is stable numerically: permutations unchanged
/// under step halving and under base perturbation inside the admissible
/// interval; level-2 cycle types invariant.
pub fn criterion_11(vcfg: &VerifyConfig) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let cfg = vcfg.engine();
        let mut halved = cfg.clone();
        halved.continuation.max_step /= 2.0;
        halved.continuation.initial_step /= 2.0;

        let f = build_f();
        let g = build_g().map_err(|e| e.to_string())?;
        let h = build_h().map_err(|e| e.to_string())?;
        let cases: Vec<(&str, Poly, f64, f64)> = vec![
            // (name, poly, base, admissible perturbation)
            ("f", f, 1.5, 0.07),
            (
                "g",
                g.poly.clone(),
                default_base_point(&g.poly, 1, &cfg).map_err(|e| e.to_string())?,
                0.05,
            ),
            ("h", h.solved.poly.clone(), h.recommended_base, h.a / 16.0),
        ];
        for (name, poly, base, bump) in &cases {
            let reference = monodromy_generators(poly, *base, 2, &cfg)
                .map_err(|e| format!("{name}: {e}"))?;
            let fine = monodromy_generators(poly, *base, 2, &halved)
                .map_err(|e| format!("{name}: {e}"))?;
            if reference.generators != fine.generators {
                return Err(format!("{name}: step halving changed the level-2 action"));
            }
            for sign in [-1.0, 1.0] {
                let moved = monodromy_generators(poly, base + sign * bump, 2, &cfg)
                    .map_err(|e| format!("{name}: {e}"))?;
                // Level-1 restriction (root permutations) must be identical;
                // level-2 entries may only shift by basepoint conjugation,
                // leaving cycle types fixed.
                let shape = TreeShape::new(poly.degree(), 2);
                for (a, b) in reference.generators.iter().zip(&moved.generators) {
                    let ra = crate::tree::root_restriction(&shape, a)
                        .ok_or_else(|| format!("{name}: not a tree automorphism"))?;
                    let rb = crate::tree::root_restriction(&shape, b)
                        .ok_or_else(|| format!("{name}: not a tree automorphism"))?;
                    if ra != rb {
                        return Err(format!(
                            "{name}: level-1 action changed under base {sign:+} perturbation"
                        ));
                    }
                    if a.cycle_type() != b.cycle_type() {
                        return Err(format!(
                            "{name}: level-2 cycle types changed under base perturbation"
                        ));
                    }
                }
            }
        }
        Ok("f, g, h level-2 actions invariant under step halving; base perturbations preserve level-1 actions and level-2 cycle types".to_string())
    })();
    outcome(11, "numeric robustness", start, result)
}

pub fn run_all(vcfg: &VerifyConfig) -> Vec<CriterionOutcome> {
    vec![
        criterion_1(vcfg),
        criterion_2(vcfg),
        criterion_3(vcfg),
        criterion_4(vcfg),
        criterion_5(),
        criterion_6(),
        criterion_7(vcfg),
        criterion_8(vcfg),
        criterion_9(),
        criterion_10(vcfg),
        criterion_11(vcfg),
    ]
}

/// Level-2 lift of a cycle system: each cycle lifted with random successor
/// decorations, plus retries until some product certifies as a full cycle.
pub fn lifted_conservative_generators(
    system: &CycleSystem,
    rng: &mut ChaCha8Rng,
    config: &BlockConfig,
) -> Option<Vec<Perm>> {
    let d = system.degree;
    let shape = TreeShape::new(d, 2);
    for _ in 0..200 {
        let mut gens = Vec::new();
        for i in 0..system.cycles.len() {
            let root = system.cycle_perm(i);
            let mut automaton = Automaton::new(d);
            let mut children = Vec::with_capacity(d);
            for letter in 0..d {
                let mut images: Vec<usize> = (1..=d).collect();
                for idx in (1..d).rev() {
                    let j = rng.gen_range(0..=idx);
                    images.swap(idx, j);
                }
                let child_root = Perm::from_images(images).expect("shuffle");
                let child_id = automaton
                    .add_state(&format!("c{letter}"), child_root, vec![Vec::new(); d])
                    .expect("fresh");
                children.push(vec![crate::automaton::SignedState::plain(child_id)]);
            }
            let top = automaton
                .add_state("top", root, children)
                .expect("fresh");
            gens.push(automaton.unroll(top, 2));
        }
        if crate::blocks::certify_full_cycle(shape.level_size(), &gens, config).is_some() {
            return Some(gens);
        }
    }
    None
}
