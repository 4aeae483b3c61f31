//! Piecewise plane paths built from segments and circular arcs, plus the
//! standard loop and connecting-path constructions along the real axis:
//! travel toward the target, detour below each obstacle through a lower
//! half-plane semicircle, and encircle the target puncture once.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("detour radius {0} too large for the gap {1}")]
    RadiusTooLarge(f64, f64),
    #[error("target {0} coincides with the base point")]
    TargetIsBase(f64),
}

#[derive(Debug, Clone)]
pub enum Piece {
    Segment {
        from: Complex64,
        to: Complex64,
    },
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        /// Signed sweep; positive is counterclockwise.
        sweep: f64,
    },
}

impl Piece {
    pub fn segment(from: Complex64, to: Complex64) -> Piece {
        Piece::Segment { from, to }
    }

    pub fn arc(center: Complex64, radius: f64, start_angle: f64, sweep: f64) -> Piece {
        Piece::Arc {
            center,
            radius,
            start_angle,
            sweep,
        }
    }

    pub fn point(&self, t: f64) -> Complex64 {
        match self {
            Piece::Segment { from, to } => from + (to - from) * t,
            Piece::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => center + Complex64::from_polar(*radius, start_angle + sweep * t),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn reversed(&self) -> Piece {
        match self {
            Piece::Segment { from, to } => Piece::Segment {
                from: *to,
                to: *from,
            },
            Piece::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => Piece::Arc {
                center: *center,
                radius: *radius,
                start_angle: start_angle + sweep,
                sweep: -sweep,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlanePath {
    pieces: Vec<Piece>,
}

impl PlanePath {
    pub fn new(pieces: Vec<Piece>) -> Self {
        PlanePath { pieces }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn start(&self) -> Complex64 {
        self.pieces.first().map_or(Complex64::default(), Piece::start)
    }

    pub fn end(&self) -> Complex64 {
        self.pieces.last().map_or(Complex64::default(), Piece::end)
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        (self.start() - self.end()).norm() <= tol
    }

    pub fn reversed(&self) -> PlanePath {
        PlanePath {
            pieces: self.pieces.iter().rev().map(Piece::reversed).collect(),
        }
    }

    pub fn concat(&self, other: &PlanePath) -> PlanePath {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        PlanePath { pieces }
    }

    /// Sample every piece uniformly; endpoints shared between pieces are not
    /// duplicated.
    pub fn sample(&self, per_piece: usize) -> Vec<Complex64> {
        let mut out = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            let start_k = if i == 0 { 0 } else { 1 };
            for k in start_k..=per_piece {
                out.push(piece.point(k as f64 / per_piece as f64));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    pub fn sweep(&self) -> f64 {
        match self {
            Orientation::Ccw => 2.0 * std::f64::consts::PI,
            Orientation::Cw => -2.0 * std::f64::consts::PI,
        }
    }
}

const PI: f64 = std::f64::consts::PI;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Real-axis march from `from` toward `to`, detouring below every obstacle
/// strictly between them through a lower-half-plane semicircle of radius
/// `epsilon`. Ends exactly at `to`.
fn march(from: f64, to: f64, obstacles: &[f64], epsilon: f64) -> Result<Vec<Piece>, PathError> {
    let mut between: Vec<f64> = obstacles
        .iter()
        .cloned()
        .filter(|&u| (u - from) * (u - to) < 0.0 && (u - from).abs() > 1e-12)
        .collect();
    between.sort_by(|a, b| a.partial_cmp(b).expect("finite obstacles"));
    let rightward = to > from;
    if !rightward {
        between.reverse();
    }
    let mut pieces = Vec::new();
    let mut cursor = from;
    for u in between {
        let gap = (u - cursor).abs();
        if gap <= epsilon {
            return Err(PathError::RadiusTooLarge(epsilon, gap));
        }
        if rightward {
            // Approach from the left, dip through the bottom.
            pieces.push(Piece::segment(real(cursor), real(u - epsilon)));
            pieces.push(Piece::arc(real(u), epsilon, PI, PI));
            cursor = u + epsilon;
        } else {
            pieces.push(Piece::segment(real(cursor), real(u + epsilon)));
            pieces.push(Piece::arc(real(u), epsilon, 0.0, -PI));
            cursor = u - epsilon;
        }
    }
    if (cursor - to).abs() > 1e-15 {
        pieces.push(Piece::segment(real(cursor), real(to)));
    }
    Ok(pieces)
}

/// The standard generator loop at a real puncture: march from the base
/// point to the edge of a circle of radius `epsilon` around the target
/// (detouring below intervening punctures), go once around with the given
/// orientation, and return by the reverse route.
pub fn build_loop(
    punctures: &[f64],
    base: f64,
    target: f64,
    epsilon: f64,
    orientation: Orientation,
) -> Result<PlanePath, PathError> {
    if (target - base).abs() <= epsilon {
        return Err(PathError::TargetIsBase(target));
    }
    let others: Vec<f64> = punctures
        .iter()
        .cloned()
        .filter(|&u| (u - target).abs() > 1e-12)
        .collect();
    let rightward = target > base;
    let approach_x = if rightward {
        target - epsilon
    } else {
        target + epsilon
    };
    let outbound = march(base, approach_x, &others, epsilon)?;
    let start_angle = if rightward { PI } else { 0.0 };
    let circle = Piece::arc(real(target), epsilon, start_angle, orientation.sweep());
    let inbound = PlanePath::new(outbound.clone()).reversed();
    let mut pieces = outbound;
    pieces.push(circle);
    pieces.extend(inbound.pieces);
    Ok(PlanePath::new(pieces))
}

/// Loops for every puncture, in puncture order.
pub fn build_loops(
    punctures: &[f64],
    base: f64,
    epsilon: f64,
    orientation: Orientation,
) -> Result<Vec<PlanePath>, PathError> {
    punctures
        .iter()
        .map(|&v| build_loop(punctures, base, v, epsilon, orientation))
        .collect()
}

/// Connecting path from the base point to one fiber point, detouring below
/// intervening punctures and intervening fiber points.
pub fn connecting_path(
    punctures: &[f64],
    fiber: &[f64],
    base: f64,
    target_index: usize,
    epsilon: f64,
) -> Result<PlanePath, PathError> {
    let target = fiber[target_index];
    let mut obstacles: Vec<f64> = punctures.to_vec();
    obstacles.extend(
        fiber
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != target_index)
            .map(|(_, &x)| x),
    );
    Ok(PlanePath::new(march(base, target, &obstacles, epsilon)?))
}

/// One third of the smallest gap among the given reals; the shared detour
/// and circle radius.
pub fn default_epsilon(values: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut min_gap = f64::INFINITY;
    for w in sorted.windows(2) {
        let gap = w[1] - w[0];
        if gap > 1e-12 {
            min_gap = min_gap.min(gap);
        }
    }
    min_gap / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_with_no_detours() {
        // Base 1.5, target 2, punctures {0, 1, 2}: nothing between.
        let path = build_loop(&[0.0, 1.0, 2.0], 1.5, 2.0, 0.1, Orientation::Ccw).unwrap();
        assert!(path.is_closed(1e-12));
        let arcs = path
            .pieces()
            .iter()
            .filter(|p| matches!(p, Piece::Arc { .. }))
            .count();
        assert_eq!(arcs, 1);
    }

    #[test]
    fn loop_with_one_detour() {
        // Base 1.5, target 0: the puncture at 1 is in the way, giving one
        // detour semicircle out and one back.
        let path = build_loop(&[0.0, 1.0, 2.0], 1.5, 0.0, 0.1, Orientation::Ccw).unwrap();
        assert!(path.is_closed(1e-12));
        let arcs: Vec<&Piece> = path
            .pieces()
            .iter()
            .filter(|p| matches!(p, Piece::Arc { .. }))
            .collect();
        assert_eq!(arcs.len(), 3);
        // Detour arcs stay in the closed lower half plane.
        for piece in path.pieces() {
            if let Piece::Arc { center, sweep, .. } = piece {
                if (center.re - 1.0).abs() < 1e-9 {
                    for k in 0..=16 {
                        let z = piece.point(k as f64 / 16.0);
                        assert!(z.im <= 1e-12);
                    }
                    assert!(sweep.abs() < 2.0 * PI - 1e-9);
                }
            }
        }
    }

    #[test]
    fn mirror_recipe_for_right_target() {
        let path = build_loop(&[0.0, 1.0], 0.5, 1.0, 0.05, Orientation::Ccw).unwrap();
        assert!(path.is_closed(1e-12));
        assert_eq!(path.pieces().len(), 3); // out, circle, back
    }

    #[test]
    fn connecting_path_detours_fiber_points() {
        let fiber = [-1.0, 0.5, 2.5];
        let path = connecting_path(&[0.0, 2.0], &fiber, 1.5, 0, 0.1).unwrap();
        assert!((path.start() - Complex64::new(1.5, 0.0)).norm() < 1e-12);
        assert!((path.end() - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        // Obstacles between 1.5 and −1: punctures {0}, fiber {0.5}: two detours.
        let arcs = path
            .pieces()
            .iter()
            .filter(|p| matches!(p, Piece::Arc { .. }))
            .count();
        assert_eq!(arcs, 2);
    }

    #[test]
    fn oversized_radius_rejected() {
        assert!(matches!(
            build_loop(&[0.0, 1.0, 1.05], 1.5, 0.0, 0.2, Orientation::Ccw),
            Err(PathError::RadiusTooLarge(_, _))
        ));
    }

    #[test]
    fn reversal_retraces() {
        let path = build_loop(&[0.0, 1.0, 2.0], 1.5, 0.0, 0.1, Orientation::Ccw).unwrap();
        let rev = path.reversed();
        assert!((rev.start() - path.end()).norm() < 1e-12);
        let samples = path.sample(16);
        let rev_samples = rev.sample(16);
        for (a, b) in samples.iter().zip(rev_samples.iter().rev()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn default_epsilon_is_third_of_min_gap() {
        let eps = default_epsilon(&[0.0, 1.0, 1.25, 3.0]);
        assert!((eps - 0.25 / 3.0).abs() < 1e-12);
    }
}
