//! Monodromy of polynomial iterates along real-axis loop conventions:
//! builds generator loops, lifts them through whole-fiber continuation,
//! labels the preimage tree recursively, and extracts the wreath recursion
//! by identifying connecting-path words.

use num_complex::Complex64;
use thiserror::Error;

use crate::automaton::{Automaton, SignedState, StateId};
use crate::path::{
    build_loop, connecting_path, default_epsilon, Orientation, PathError, PlanePath,
};
use crate::perm::Perm;
use crate::poly::{
    all_roots, continue_fiber, critical_data, loop_permutation,
    Continuation, ContinuationConfig, NumericError, Poly, RootConfig,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("post-critical set is not real; the real-axis convention does not apply")]
    NonRealPostCritical,
    #[error("base point {0} is within clearance of a puncture")]
    BaseTooClose(f64),
    #[error("level-1 fiber is not real, wreath extraction needs the real-axis convention")]
    NonRealFiber,
    #[error("curve passes within clearance of the ray base at puncture index {0}")]
    AmbiguousCrossing(usize),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub orientation: Orientation,
    /// Direction of the crossing-count rays from each puncture; a little
    /// off vertical so that curves riding mirror-symmetry axes (which real
    /// polynomials produce) never coincide with a ray.
    pub ray_angle: f64,
    /// Relative clearance for ambiguous ray crossings and base placement.
    pub clearance: f64,
    /// Samples per analytic piece when rendering paths to polylines.
    pub samples_per_piece: usize,
    /// Forward-orbit depth used to detect a finite post-critical set.
    pub post_critical_depth: usize,
    pub roots: RootConfig,
    pub continuation: ContinuationConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            orientation: Orientation::Ccw,
            ray_angle: std::f64::consts::FRAC_PI_2 - 0.15,
            clearance: 1e-9,
            samples_per_piece: 128,
            post_critical_depth: 16,
            roots: RootConfig::default(),
            continuation: ContinuationConfig {
                max_step: 1.0 / 16.0,
                initial_step: 1.0 / 32.0,
                ..ContinuationConfig::default()
            },
        }
    }
}

/// Tree labels as flat arrays per level: `levels[k][flat − 1]` is the point
/// whose word has rank `flat` at level `k`.
#[derive(Debug, Clone)]
pub struct FiberLabels {
    pub degree: usize,
    pub level: usize,
    pub levels: Vec<Vec<Complex64>>,
    /// Whether level-1 labels are ascending real (the normative convention).
    pub real_convention: bool,
}

#[derive(Debug, Clone)]
pub struct MonodromyData {
    pub base: f64,
    pub level: usize,
    pub punctures: Vec<f64>,
    /// One permutation of the d^level labels per puncture, puncture order.
    pub generators: Vec<Perm>,
    pub labels: FiberLabels,
    pub warnings: Vec<String>,
}

/// Real punctures for the monodromy of the n-th iterate: the forward
/// critical orbit, sorted ascending and deduplicated. When the orbit closes
/// up (post-critically finite) the full finite set is used at every level,
/// so the generator list is the same at all depths; otherwise the orbit is
/// truncated at the requested level.
pub fn punctures_for_level(
    poly: &Poly,
    level: usize,
    cfg: &EngineConfig,
) -> Result<Vec<f64>, EngineError> {
    let deep = critical_data(poly, cfg.post_critical_depth.max(level), &cfg.roots)?;
    let data = if deep.post_critical_finite {
        deep
    } else {
        critical_data(poly, level, &cfg.roots)?
    };
    if !data.post_critical_real() {
        return Err(EngineError::NonRealPostCritical);
    }
    let mut punctures: Vec<f64> = data.post_critical.iter().map(|v| v.re).collect();
    punctures.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    punctures.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    Ok(punctures)
}

/// Base point selection: the midpoint of the widest interval between
/// consecutive punctures whose level-1 fiber is entirely real. Falls back
/// to one unit right of the last puncture when no interval qualifies.
pub fn default_base_point(
    poly: &Poly,
    level: usize,
    cfg: &EngineConfig,
) -> Result<f64, EngineError> {
    let punctures = punctures_for_level(poly, level, cfg)?;
    let mut best: Option<(f64, f64)> = None; // (width, midpoint)
    for w in punctures.windows(2) {
        let width = w[1] - w[0];
        let mid = 0.5 * (w[0] + w[1]);
        if fiber_is_real(poly, mid, &cfg.roots) {
            let better = best.is_none_or(|(bw, _)| width > bw + 1e-12);
            if better {
                best = Some((width, mid));
            }
        }
    }
    Ok(best
        .map(|(_, mid)| mid)
        .unwrap_or_else(|| punctures.last().copied().unwrap_or(0.0) + 1.0))
}

fn fiber_is_real(poly: &Poly, base: f64, roots_cfg: &RootConfig) -> bool {
    let shifted = poly.sub_const(Complex64::new(base, 0.0));
    match all_roots(&shifted, roots_cfg) {
        Ok(roots) => {
            roots.len() == poly.degree()
                && roots.iter().all(|r| {
                    r.multiplicity == 1 && r.value.im.abs() <= 1e-8 * (1.0 + r.value.norm())
                })
        }
        Err(_) => false,
    }
}

/// Level-1 fiber with the normative ascending-real labeling, or canonical
/// (re, im) ordering with a warning when the fiber is not real.
fn level_one_fiber(
    poly: &Poly,
    base: f64,
    cfg: &EngineConfig,
    warnings: &mut Vec<String>,
) -> Result<(Vec<Complex64>, bool), EngineError> {
    let shifted = poly.sub_const(Complex64::new(base, 0.0));
    let roots = all_roots(&shifted, &cfg.roots)?;
    if roots.len() != poly.degree() || roots.iter().any(|r| r.multiplicity != 1) {
        return Err(EngineError::Numeric(NumericError::DegenerateBasePoint));
    }
    let mut points: Vec<Complex64> = roots.iter().map(|r| r.value).collect();
    let scale = 1.0 + points.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let real = points.iter().all(|z| z.im.abs() <= 1e-8 * scale);
    if real {
        points.sort_by(|a, b| a.re.partial_cmp(&b.re).expect("finite"));
        points = points.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
    } else {
        warnings.push(
            "level-1 fiber is not real; labels use the canonical (re, im) order".to_string(),
        );
        points.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).expect("finite"));
    }
    Ok((points, real))
}

/// Build labels level by level. Under the real convention, the label of
/// `i·w` is the endpoint of the lift under the |w|-th iterate of the
/// connecting path to fiber point i, started at the label of `w`; otherwise
/// children are ordered canonically below their parents.
fn build_labels(
    poly: &Poly,
    base: f64,
    level: usize,
    punctures: &[f64],
    cfg: &EngineConfig,
    warnings: &mut Vec<String>,
) -> Result<(FiberLabels, Vec<PlanePath>), EngineError> {
    let d = poly.degree();
    let (fiber1, real) = level_one_fiber(poly, base, cfg, warnings)?;
    let mut levels: Vec<Vec<Complex64>> = vec![vec![Complex64::new(base, 0.0)], fiber1.clone()];
    let mut connecting: Vec<PlanePath> = Vec::new();
    if real {
        let fiber_re: Vec<f64> = fiber1.iter().map(|z| z.re).collect();
        let mut gap_points: Vec<f64> = punctures.to_vec();
        gap_points.extend(&fiber_re);
        gap_points.push(base);
        let epsilon = default_epsilon(&gap_points);
        for i in 0..d {
            connecting.push(connecting_path(punctures, &fiber_re, base, i, epsilon)?);
        }
        for k in 1..level {
            let prior = levels[k].clone();
            let mut next = vec![Complex64::default(); prior.len() * d];
            for (i, path) in connecting.iter().enumerate() {
                let cont = continue_fiber(poly, k, path, &prior, &cfg.continuation)?;
                for (w, &end) in cont.endpoints.iter().enumerate() {
                    next[i * prior.len() + w] = end;
                }
            }
            levels.push(next);
        }
    } else {
        // Canonical fallback: children of each labeled point are its
        // preimages sorted by (re, im); the word grows at the last letter,
        // so index maps are parent-major at each extension.
        for k in 1..level {
            let prior = levels[k].clone();
            let mut next = vec![Complex64::default(); prior.len() * d];
            for (w, &parent) in prior.iter().enumerate() {
                let shifted = poly.sub_const(parent);
                let roots = all_roots(&shifted, &cfg.roots)?;
                if roots.len() != d || roots.iter().any(|r| r.multiplicity != 1) {
                    return Err(EngineError::Numeric(NumericError::DegenerateBasePoint));
                }
                let mut pts: Vec<Complex64> = roots.iter().map(|r| r.value).collect();
                pts.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).expect("finite"));
                // Children of word w keep w's prefix: under the first-letter-
                // major flat order, child j of w sits at (w·d + j) only when
                // the appended letter is least significant, which it is.
                for (j, &z) in pts.iter().enumerate() {
                    next[w * d + j] = z;
                }
            }
            levels.push(next);
        }
    }
    Ok((
        FiberLabels {
            degree: d,
            level,
            levels,
            real_convention: real,
        },
        connecting,
    ))
}

/// Monodromy generators of the level-n action, one per puncture.
pub fn monodromy_generators(
    poly: &Poly,
    base: f64,
    level: usize,
    cfg: &EngineConfig,
) -> Result<MonodromyData, EngineError> {
    let punctures = punctures_for_level(poly, level, cfg)?;
    let scale = puncture_scale(&punctures);
    if punctures
        .iter()
        .any(|&u| (u - base).abs() <= cfg.clearance * scale)
    {
        return Err(EngineError::BaseTooClose(base));
    }
    let mut warnings = Vec::new();
    let (labels, _connecting) =
        build_labels(poly, base, level, &punctures, cfg, &mut warnings)?;
    let mut gap_points: Vec<f64> = punctures.to_vec();
    gap_points.push(base);
    if labels.real_convention {
        gap_points.extend(labels.levels[1].iter().map(|z| z.re));
    }
    let epsilon = default_epsilon(&gap_points);
    let fiber = labels.levels[level].clone();
    let mut generators = Vec::new();
    for &puncture in &punctures {
        let lp = build_loop(&punctures, base, puncture, epsilon, cfg.orientation)?;
        let cont = continue_fiber(poly, level, &lp, &fiber, &cfg.continuation)?;
        generators.push(loop_permutation(&fiber, &cont.endpoints)?);
    }
    Ok(MonodromyData {
        base,
        level,
        punctures,
        generators,
        labels,
        warnings,
    })
}

fn puncture_scale(punctures: &[f64]) -> f64 {
    let span = punctures.last().copied().unwrap_or(0.0)
        - punctures.first().copied().unwrap_or(0.0);
    1.0 + span.abs()
        + punctures
            .iter()
            .map(|u| u.abs())
            .fold(0.0, f64::max)
}

/// Extraction result: the automaton plus the puncture each generator state
/// encircles, in ascending puncture order.
#[derive(Debug, Clone)]
pub struct ExtractedAutomaton {
    pub base: f64,
    pub punctures: Vec<f64>,
    pub automaton: Automaton,
    pub state_ids: Vec<StateId>,
    pub warnings: Vec<String>,
}

/// Compute the full wreath recursion of the iterated monodromy action: for
/// each generator loop ℓ and each level-1 point i, continue the fiber
/// along ℓ, close up the lift with the connecting paths, and read the
/// resulting word off its ray crossings.
pub fn extract_wreath_recursion(
    poly: &Poly,
    base: f64,
    cfg: &EngineConfig,
) -> Result<ExtractedAutomaton, EngineError> {
    let punctures = punctures_for_level(poly, cfg.post_critical_depth, cfg)?;
    let scale = puncture_scale(&punctures);
    if punctures
        .iter()
        .any(|&u| (u - base).abs() <= cfg.clearance * scale)
    {
        return Err(EngineError::BaseTooClose(base));
    }
    let mut warnings = Vec::new();
    let (fiber1, real) = level_one_fiber(poly, base, cfg, &mut warnings)?;
    if !real {
        return Err(EngineError::NonRealFiber);
    }
    let d = poly.degree();
    let fiber_re: Vec<f64> = fiber1.iter().map(|z| z.re).collect();
    let mut gap_points: Vec<f64> = punctures.to_vec();
    gap_points.extend(&fiber_re);
    gap_points.push(base);
    let epsilon = default_epsilon(&gap_points);
    let connecting: Vec<PlanePath> = (0..d)
        .map(|i| connecting_path(&punctures, &fiber_re, base, i, epsilon))
        .collect::<Result<_, _>>()?;
    let connecting_samples: Vec<Vec<Complex64>> = connecting
        .iter()
        .map(|p| p.sample(cfg.samples_per_piece))
        .collect();

    let mut automaton = Automaton::new(d);
    let state_ids: Vec<StateId> = (0..punctures.len())
        .map(|k| {
            automaton
                .add_state(
                    &format!("g{}", k + 1),
                    Perm::identity(d),
                    vec![Vec::new(); d],
                )
                .expect("fresh state")
        })
        .collect();

    let clearance_abs = cfg.clearance * scale;
    for (pi, &puncture) in punctures.iter().enumerate() {
        let lp = build_loop(&punctures, base, puncture, epsilon, cfg.orientation)?;
        let cont: Continuation = continue_fiber(poly, 1, &lp, &fiber1, &cfg.continuation)?;
        let root = loop_permutation(&fiber1, &cont.endpoints)?;
        let mut children: Vec<Vec<SignedState>> = Vec::with_capacity(d);
        for i in 0..d {
            let j = root.apply(i + 1) - 1;
            // Closed curve π_i · (lift of the loop from x_i) · π_j⁻¹.
            let mut curve = connecting_samples[i].clone();
            curve.extend(cont.tracks[i].iter().cloned());
            curve.extend(connecting_samples[j].iter().rev().cloned());
            let word = homotopy_word(&curve, &punctures, cfg.ray_angle, clearance_abs)?;
            children.push(
                word.into_iter()
                    .map(|(k, sign)| SignedState {
                        id: state_ids[k],
                        inverse: sign < 0,
                    })
                    .collect(),
            );
        }
        automaton
            .redefine(state_ids[pi], root, children)
            .expect("degree-consistent state");
    }
    Ok(ExtractedAutomaton {
        base,
        punctures,
        automaton,
        state_ids,
        warnings,
    })
}

/// Reduced word of a closed curve in the free generators of the punctured
/// plane, read off signed crossings of a ray from each puncture. The ray
/// direction is shared by all punctures; a counterclockwise loop around a
/// puncture crosses its own ray exactly once, positively.
pub fn homotopy_word(
    polyline: &[Complex64],
    punctures: &[f64],
    ray_angle: f64,
    clearance: f64,
) -> Result<Vec<(usize, i8)>, EngineError> {
    let ray = Complex64::from_polar(1.0, ray_angle);
    let mut crossings: Vec<(usize, f64, usize, i8)> = Vec::new(); // (segment, t, puncture, sign)
    for (seg, pair) in polyline.windows(2).enumerate() {
        let (z1, z2) = (pair[0], pair[1]);
        let dz = z2 - z1;
        if dz.norm() == 0.0 {
            continue;
        }
        for (pi, &u) in punctures.iter().enumerate() {
            let det = ray.re * dz.im - ray.im * dz.re;
            let bx = u - z1.re;
            let by = -z1.im;
            if det.abs() < 1e-300 {
                // Parallel travel: ambiguous only if it rides the ray.
                let s1 = (z1 - Complex64::new(u, 0.0)) / ray;
                if s1.im.abs() <= clearance && s1.re > -clearance {
                    return Err(EngineError::AmbiguousCrossing(pi));
                }
                continue;
            }
            let t = (-bx * ray.im + ray.re * by) / det;
            let s = (dz.re * by - dz.im * bx) / det;
            if (0.0..1.0).contains(&t) {
                if s.abs() <= clearance {
                    return Err(EngineError::AmbiguousCrossing(pi));
                }
                if s > 0.0 {
                    let sign = if det > 0.0 { 1i8 } else { -1i8 };
                    crossings.push((seg, t, pi, sign));
                }
            }
        }
    }
    crossings.sort_by(|a, b| {
        (a.0, a.1)
            .partial_cmp(&(b.0, b.1))
            .expect("finite parameters")
    });
    // Free reduction.
    let mut word: Vec<(usize, i8)> = Vec::new();
    for (_, _, pi, sign) in crossings {
        if let Some(&(top_p, top_s)) = word.last() {
            if top_p == pi && top_s == -sign {
                word.pop();
                continue;
            }
        }
        word.push((pi, sign));
    }
    Ok(word)
}

/// Search for an ordering of the generators whose product is a full cycle,
/// as the loop around infinity decomposes into the finite-puncture loops.
#[derive(Debug, Clone)]
pub struct InfinityCycleReport {
    pub found: bool,
    pub ordering: Option<String>,
    pub order: u128,
}

pub fn infinity_cycle_check(generators: &[Perm]) -> InfinityCycleReport {
    let try_product = |gens: Vec<&Perm>| -> Option<Perm> {
        let mut acc = Perm::identity(gens.first()?.degree());
        for g in gens {
            acc = g.compose(&acc).expect("equal degrees");
        }
        acc.is_full_cycle().then_some(acc)
    };
    let candidates: [(&str, Vec<&Perm>); 4] = [
        ("left-to-right", generators.iter().collect()),
        ("right-to-left", generators.iter().rev().collect()),
        ("left-to-right-inverted", generators.iter().collect()),
        ("right-to-left-inverted", generators.iter().rev().collect()),
    ];
    for (idx, (name, gens)) in candidates.into_iter().enumerate() {
        let inverted: Vec<Perm>;
        let refs: Vec<&Perm> = if idx >= 2 {
            inverted = gens.iter().map(|g| g.inverse()).collect();
            inverted.iter().collect()
        } else {
            gens
        };
        if let Some(cycle) = try_product(refs) {
            return InfinityCycleReport {
                found: true,
                ordering: Some(name.to_string()),
                order: cycle.order(),
            };
        }
    }
    InfinityCycleReport {
        found: false,
        ordering: None,
        order: 0,
    }
}
