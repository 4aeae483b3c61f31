//! Construction of the named example polynomials: the degree-6 composite f
//! by closed formula, g and h by Newton solution of critical-portrait
//! constraint systems, the conservative cubic, and power maps.

use num_complex::Complex64;
use thiserror::Error;

use crate::poly::Poly;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("Newton did not converge; residual trace {0:?}")]
    NewtonDiverged(Vec<f64>),
    #[error("solution violates the slot ordering constraints: {0:?}")]
    OrderingViolated(Vec<f64>),
    #[error("equation residual {0} above tolerance at the solution")]
    ResidualTooLarge(f64),
    #[error("grid scan found no admissible starting point")]
    GridScanFailed,
    #[error("linear solve failed: singular Jacobian")]
    SingularJacobian,
}

const TARGET_RESIDUAL: f64 = 1e-10;

/// Critical-point slot: a pinned position or a free unknown. Slots are
/// listed in ascending order and the solution must keep them strictly
/// ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Fixed(f64),
    Free { initial: f64 },
}

/// A point referenced by an equation: a literal or one of the slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointRef {
    Literal(f64),
    Slot(usize),
}

/// One target equation: the polynomial (or its second iterate) at a point
/// equals a constant or a slot value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equation {
    pub iterate: usize,
    pub at: PointRef,
    pub equals: PointRef,
}

impl Equation {
    pub fn value(at: PointRef, equals: PointRef) -> Self {
        Equation {
            iterate: 1,
            at,
            equals,
        }
    }

    pub fn second_iterate(at: PointRef, equals: PointRef) -> Self {
        Equation {
            iterate: 2,
            at,
            equals,
        }
    }
}

/// A square constraint system: the polynomial is `lead·Q(z) + constant`
/// with Q the antiderivative (vanishing at 0) of the monic product over the
/// critical slots, so the critical points are exact by construction and
/// only the target equations are solved numerically.
#[derive(Debug, Clone)]
pub struct PortraitSpec {
    pub slots: Vec<Slot>,
    pub equations: Vec<Equation>,
    pub lead_initial: f64,
    pub constant_initial: f64,
}

#[derive(Debug, Clone)]
pub struct SolvedPortrait {
    pub poly: Poly,
    pub lead: f64,
    pub constant: f64,
    /// All slot positions at the solution, ascending.
    pub slots: Vec<f64>,
    pub residual: f64,
    pub newton_steps: usize,
}

impl PortraitSpec {
    fn free_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, Slot::Free { .. }))
            .count()
    }

    /// Unknown vector: [lead, constant, free slots...].
    fn initial_vector(&self) -> Vec<f64> {
        let mut u = vec![self.lead_initial, self.constant_initial];
        for s in &self.slots {
            if let Slot::Free { initial } = s {
                u.push(*initial);
            }
        }
        u
    }

    fn slot_values(&self, u: &[f64]) -> Vec<f64> {
        let mut free = u[2..].iter();
        self.slots
            .iter()
            .map(|s| match s {
                Slot::Fixed(x) => *x,
                Slot::Free { .. } => *free.next().expect("one unknown per free slot"),
            })
            .collect()
    }

    fn poly_from(&self, u: &[f64]) -> Poly {
        let slots = self.slot_values(u);
        let mut dp = Poly::from_real(&[1.0]).expect("nonzero");
        for c in slots {
            dp = dp.mul(&Poly::from_real(&[-c, 1.0]).expect("nonzero"));
        }
        let q = dp.antiderivative();
        q.scale(Complex64::new(u[0], 0.0))
            .sub_const(Complex64::new(-u[1], 0.0))
    }

    fn resolve(&self, r: PointRef, slots: &[f64]) -> f64 {
        match r {
            PointRef::Literal(x) => x,
            PointRef::Slot(i) => slots[i],
        }
    }

    fn residuals(&self, u: &[f64]) -> Vec<f64> {
        let poly = self.poly_from(u);
        let slots = self.slot_values(u);
        self.equations
            .iter()
            .map(|eq| {
                let at = Complex64::new(self.resolve(eq.at, &slots), 0.0);
                let val = poly.eval_iterate(eq.iterate, at);
                val.re - self.resolve(eq.equals, &slots)
            })
            .collect()
    }

    /// Newton with central-difference Jacobian and halving line search.
    pub fn solve(&self) -> Result<SolvedPortrait, ConstructError> {
        let n = self.equations.len();
        assert_eq!(
            n,
            2 + self.free_count(),
            "system must be square: lead + constant + free slots"
        );
        let mut u = self.initial_vector();
        let mut trace = Vec::new();
        let mut steps = 0usize;
        for _ in 0..80 {
            let r = self.residuals(&u);
            let norm = r.iter().map(|x| x.abs()).fold(0.0, f64::max);
            trace.push(norm);
            if norm < 1e-12 {
                break;
            }
            let mut jac = vec![vec![0.0f64; n]; n];
            for col in 0..n {
                let h = 1e-7 * (1.0 + u[col].abs());
                let mut up = u.clone();
                up[col] += h;
                let mut down = u.clone();
                down[col] -= h;
                let ru = self.residuals(&up);
                let rd = self.residuals(&down);
                for row in 0..n {
                    jac[row][col] = (ru[row] - rd[row]) / (2.0 * h);
                }
            }
            let delta = solve_linear(&mut jac, &r)?;
            // Halving line search on the max-norm of the residual.
            let mut factor = 1.0f64;
            let mut improved = false;
            for _ in 0..10 {
                let candidate: Vec<f64> = u
                    .iter()
                    .zip(&delta)
                    .map(|(x, d)| x - factor * d)
                    .collect();
                let cr = self.residuals(&candidate);
                let cnorm = cr.iter().map(|x| x.abs()).fold(0.0, f64::max);
                if cnorm < norm {
                    u = candidate;
                    improved = true;
                    break;
                }
                factor *= 0.5;
            }
            steps += 1;
            if !improved {
                // Stalled at the floating-point floor: accept if already
                // within the target, otherwise report the trace.
                if norm <= TARGET_RESIDUAL {
                    break;
                }
                return Err(ConstructError::NewtonDiverged(trace));
            }
        }
        let r = self.residuals(&u);
        let residual = r.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if residual > TARGET_RESIDUAL {
            return Err(ConstructError::ResidualTooLarge(residual));
        }
        let slots = self.slot_values(&u);
        if slots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConstructError::OrderingViolated(slots));
        }
        Ok(SolvedPortrait {
            poly: self.poly_from(&u),
            lead: u[0],
            constant: u[1],
            slots,
            residual,
            newton_steps: steps,
        })
    }
}

fn solve_linear(a: &mut [Vec<f64>], b: &[f64]) -> Result<Vec<f64>, ConstructError> {
    let n = b.len();
    let mut x: Vec<f64> = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("finite")
            })
            .expect("nonempty");
        if a[pivot][col].abs() < 1e-14 {
            return Err(ConstructError::SingularJacobian);
        }
        a.swap(col, pivot);
        x.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (k, pv) in pivot_row.iter().enumerate().skip(col) {
                a[row][k] -= factor * pv;
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= a[col][col];
        for row in 0..col {
            x[row] -= a[row][col] * x[col];
            a[row][col] = 0.0;
        }
    }
    Ok(x)
}

/// The degree-6 polynomial with critical points 0 < c₁ < 1 < c₂ < 2,
/// f(0) = f(2) = 0, f(c₁) = f(c₂) = 2, f(1) = 1, built from an even
/// auxiliary polynomial with critical points 0, ±1, ±α where α² = 2 + √3.
pub fn build_f() -> Poly {
    let a = 2.0 + 3.0f64.sqrt();
    // u = α² satisfies u³ − 3u² − 3u + 1 = 0, the condition that makes the
    // auxiliary values at 1 and α opposite.
    debug_assert!((a * a * a - 3.0 * a * a - 3.0 * a + 1.0).abs() < 1e-12);
    let alpha = a.sqrt();
    // Auxiliary even polynomial: antiderivative of z(z² − 1)(z² − α²),
    // which is a/2·z² − (1+a)/4·z⁴ + z⁶/6.
    let aux = Poly::from_real(&[0.0, 0.0, a / 2.0, 0.0, -(1.0 + a) / 4.0, 0.0, 1.0 / 6.0])
        .expect("nonzero");
    let h1 = aux.eval(Complex64::new(1.0, 0.0)).re;
    // f(z) = 1 + aux(α(z − 1))/aux(1).
    let inner = Poly::from_real(&[-alpha, alpha]).expect("nonzero");
    let f = aux
        .compose(&inner)
        .scale(Complex64::new(1.0 / h1, 0.0))
        .add(&Poly::from_real(&[1.0]).expect("nonzero"));
    let fp = |x: f64| f.eval(Complex64::new(x, 0.0)).re;
    debug_assert!(fp(0.0).abs() < 1e-9);
    debug_assert!(fp(2.0).abs() < 1e-9);
    debug_assert!((fp(1.0) - 1.0).abs() < 1e-9);
    debug_assert!((fp(1.0 - 1.0 / alpha) - 2.0).abs() < 1e-9);
    debug_assert!((fp(1.0 + 1.0 / alpha) - 2.0).abs() < 1e-9);
    f
}

/// The critical points of f in ascending order: 0, 1 − 1/α, 1, 1 + 1/α, 2.
pub fn f_critical_points() -> [f64; 5] {
    let alpha = (2.0 + 3.0f64.sqrt()).sqrt();
    [0.0, 1.0 - 1.0 / alpha, 1.0, 1.0 + 1.0 / alpha, 2.0]
}

/// Constraint system for g: critical points c₁ < c₂ < 0 < c₃ < 1 and 1,
/// with g(c₁) = c₁, g(c₂) = g(c₃) = 1, g(1) = g(0) = 0.
pub fn g_spec() -> PortraitSpec {
    let (c1, c2, c3, lead) = g_grid_scan().expect("grid scan finds a seed");
    PortraitSpec {
        slots: vec![
            Slot::Free { initial: c1 },
            Slot::Free { initial: c2 },
            Slot::Fixed(0.0),
            Slot::Free { initial: c3 },
            Slot::Fixed(1.0),
        ],
        equations: vec![
            Equation::value(PointRef::Slot(0), PointRef::Slot(0)),
            Equation::value(PointRef::Slot(1), PointRef::Literal(1.0)),
            Equation::value(PointRef::Slot(3), PointRef::Literal(1.0)),
            Equation::value(PointRef::Literal(1.0), PointRef::Literal(0.0)),
            Equation::value(PointRef::Literal(0.0), PointRef::Literal(0.0)),
        ],
        lead_initial: lead,
        constant_initial: 0.0,
    }
}

fn g_grid_scan() -> Option<(f64, f64, f64, f64)> {
    let mut best: Option<(f64, (f64, f64, f64, f64))> = None;
    let eval_candidate = |c1: f64, c2: f64, c3: f64| -> Option<(f64, f64)> {
        let mut dp = Poly::from_real(&[1.0]).ok()?;
        for c in [c1, c2, 0.0, c3, 1.0] {
            dp = dp.mul(&Poly::from_real(&[-c, 1.0]).ok()?);
        }
        let q = dp.antiderivative();
        let qv = |x: f64| q.eval(Complex64::new(x, 0.0)).re;
        // Anchor: g(0) = 0 makes the constant 0; g(c₂) = 1 fixes the lead.
        if qv(c2).abs() < 1e-9 {
            return None;
        }
        let lead = 1.0 / qv(c2);
        let g = |x: f64| lead * qv(x);
        let score =
            (g(c1) - c1).powi(2) + (g(c3) - 1.0).powi(2) + g(1.0).powi(2);
        Some((score, lead))
    };
    for i in 1..30 {
        let c1 = -3.0 + 2.8 * i as f64 / 30.0;
        for j in 1..30 {
            let c2 = c1 + (0.0 - c1) * j as f64 / 30.0;
            if c2 >= -0.01 {
                continue;
            }
            for k in 1..20 {
                let c3 = k as f64 / 20.0;
                if let Some((score, lead)) = eval_candidate(c1, c2, c3) {
                    if best.as_ref().is_none_or(|(s, _)| score < *s) {
                        best = Some((score, (c1, c2, c3, lead)));
                    }
                }
            }
        }
    }
    best.map(|(_, seed)| seed)
}

/// Constraint system for h: critical points 0 < c₁ < b < c₂ < 2 with
/// h(0) = h(2) = 0, h(c₁) = h(c₂) = 2, and the middle critical point on a
/// two-cycle: h(h(b)) = b.
pub fn h_spec() -> PortraitSpec {
    let (c1, b, c2, lead) = h_grid_scan().expect("grid scan finds a seed");
    PortraitSpec {
        slots: vec![
            Slot::Fixed(0.0),
            Slot::Free { initial: c1 },
            Slot::Free { initial: b },
            Slot::Free { initial: c2 },
            Slot::Fixed(2.0),
        ],
        equations: vec![
            Equation::value(PointRef::Literal(0.0), PointRef::Literal(0.0)),
            Equation::value(PointRef::Literal(2.0), PointRef::Literal(0.0)),
            Equation::value(PointRef::Slot(1), PointRef::Literal(2.0)),
            Equation::value(PointRef::Slot(3), PointRef::Literal(2.0)),
            Equation::second_iterate(PointRef::Slot(2), PointRef::Slot(2)),
        ],
        lead_initial: lead,
        constant_initial: 0.0,
    }
}

fn h_grid_scan() -> Option<(f64, f64, f64, f64)> {
    let mut best: Option<(f64, (f64, f64, f64, f64))> = None;
    for i in 1..19 {
        let c1 = i as f64 / 19.0;
        for j in 1..19 {
            let c2 = 1.0 + j as f64 / 19.0;
            for k in 1..24 {
                let b = c1 + (c2 - c1) * k as f64 / 24.0;
                let mut dp = Poly::from_real(&[1.0]).ok()?;
                for c in [0.0, c1, b, c2, 2.0] {
                    dp = dp.mul(&Poly::from_real(&[-c, 1.0]).ok()?);
                }
                let q = dp.antiderivative();
                let qv = |x: f64| q.eval(Complex64::new(x, 0.0)).re;
                if qv(c1).abs() < 1e-9 {
                    continue;
                }
                let lead = 2.0 / qv(c1);
                let h = |x: f64| lead * qv(x);
                // The middle critical value must land inside (0, c₁), the
                // basin where the critical two-cycle lives.
                let hb = h(b);
                if lead <= 0.0 || hb <= 0.0 || hb >= c1 {
                    continue;
                }
                let score = h(2.0).powi(2)
                    + (h(c2) - 2.0).powi(2)
                    + (h(hb) - b).powi(2);
                if best.as_ref().is_none_or(|(s, _)| score < *s) {
                    best = Some((score, (c1, b, c2, lead)));
                }
            }
        }
    }
    best.map(|(_, seed)| seed)
}

/// Conservative cubic: critical points 0 and 1, both fixed.
pub fn conservative_cubic_spec() -> PortraitSpec {
    PortraitSpec {
        slots: vec![Slot::Fixed(0.0), Slot::Fixed(1.0)],
        equations: vec![
            Equation::value(PointRef::Literal(0.0), PointRef::Literal(0.0)),
            Equation::value(PointRef::Literal(1.0), PointRef::Literal(1.0)),
        ],
        lead_initial: 1.0,
        constant_initial: 0.0,
    }
}

pub fn power_map(degree: usize) -> Poly {
    assert!(degree >= 2);
    Poly::monomial(degree)
}

/// Solved h with its derived quantities: a = h(b) and the default base
/// point just right of a.
#[derive(Debug, Clone)]
pub struct SolvedH {
    pub solved: SolvedPortrait,
    pub c1: f64,
    pub b: f64,
    pub c2: f64,
    /// a = h(b), the second point of the critical two-cycle.
    pub a: f64,
    /// Distance of the middle critical point from the nominal position 1.
    pub b_offset_from_one: f64,
    /// Default base point: a + (smallest puncture gap)/4, inside (a, b).
    pub recommended_base: f64,
}

pub fn build_h() -> Result<SolvedH, ConstructError> {
    let solved = h_spec().solve()?;
    let (c1, b, c2) = (solved.slots[1], solved.slots[2], solved.slots[3]);
    let a = solved.poly.eval(Complex64::new(b, 0.0)).re;
    if !(0.0 < a && a < c1) {
        return Err(ConstructError::OrderingViolated(vec![a, c1]));
    }
    let punctures = [0.0, a, b, 2.0];
    let min_gap = punctures
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    Ok(SolvedH {
        c1,
        b,
        c2,
        a,
        b_offset_from_one: (b - 1.0).abs(),
        recommended_base: a + min_gap / 4.0,
        solved,
    })
}

pub fn build_g() -> Result<SolvedPortrait, ConstructError> {
    g_spec().solve()
}

pub fn build_conservative_cubic() -> Result<SolvedPortrait, ConstructError> {
    conservative_cubic_spec().solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{all_roots, critical_data, RootConfig};

    #[test]
    fn f_critical_structure() {
        let f = build_f();
        assert_eq!(f.degree(), 6);
        assert!(f.is_real());
        let expected = f_critical_points();
        let roots = all_roots(&f.derivative(), &RootConfig::default()).unwrap();
        assert_eq!(roots.len(), 5);
        for (r, e) in roots.iter().zip(&expected) {
            assert!((r.value - Complex64::new(*e, 0.0)).norm() < 1e-8);
            assert_eq!(r.multiplicity, 1);
        }
        let data = critical_data(&f, 4, &RootConfig::default()).unwrap();
        // Critical values are exactly {0, 1, 2}.
        let values: Vec<f64> = data.values.iter().map(|v| v.0.re).collect();
        assert_eq!(values.len(), 3);
        assert!((values[0] - 0.0).abs() < 1e-8);
        assert!((values[1] - 1.0).abs() < 1e-8);
        assert!((values[2] - 2.0).abs() < 1e-8);
        // Post-critical set is {0, 1, 2}: every critical value is fixed.
        assert_eq!(data.post_critical.len(), 3);
    }

    #[test]
    fn alpha_squared_satisfies_the_cubic() {
        let u = 2.0 + 3.0f64.sqrt();
        assert!((u.powi(3) - 3.0 * u.powi(2) - 3.0 * u + 1.0).abs() < 1e-12);
        // And the auxiliary polynomial values at 1 and α are opposite.
        let a = u;
        let aux = |z: f64| a / 2.0 * z.powi(2) - (1.0 + a) / 4.0 * z.powi(4) + z.powi(6) / 6.0;
        assert!((aux(1.0) + aux(a.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn conservative_cubic_coefficients() {
        let solved = build_conservative_cubic().unwrap();
        let coeffs = solved.poly.coeffs();
        assert_eq!(coeffs.len(), 4);
        assert!(coeffs[0].norm() < 1e-12);
        assert!(coeffs[1].norm() < 1e-12);
        assert!((coeffs[2] - Complex64::new(3.0, 0.0)).norm() < 1e-10);
        assert!((coeffs[3] - Complex64::new(-2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn g_solves_with_correct_shape() {
        let solved = build_g().unwrap();
        assert!(solved.residual < 1e-10);
        let g = |x: f64| solved.poly.eval(Complex64::new(x, 0.0)).re;
        let (c1, c2, c3) = (solved.slots[0], solved.slots[1], solved.slots[3]);
        assert!(c1 < c2 && c2 < 0.0 && 0.0 < c3 && c3 < 1.0);
        assert!((g(c1) - c1).abs() < 1e-9);
        assert!((g(c2) - 1.0).abs() < 1e-9);
        assert!((g(c3) - 1.0).abs() < 1e-9);
        assert!(g(0.0).abs() < 1e-9);
        assert!(g(1.0).abs() < 1e-9);
    }

    #[test]
    fn h_solves_with_two_cycle() {
        let built = build_h().unwrap();
        let h = |x: f64| built.solved.poly.eval(Complex64::new(x, 0.0)).re;
        assert!(0.0 < built.c1 && built.c1 < built.b && built.b < built.c2 && built.c2 < 2.0);
        assert!((h(built.c1) - 2.0).abs() < 1e-9);
        assert!((h(built.c2) - 2.0).abs() < 1e-9);
        assert!(h(0.0).abs() < 1e-9);
        assert!(h(2.0).abs() < 1e-9);
        // The two-cycle: h(b) = a, h(a) = b with 0 < a < c₁.
        assert!((h(built.b) - built.a).abs() < 1e-9);
        assert!((h(built.a) - built.b).abs() < 1e-9);
        assert!(0.0 < built.a && built.a < built.c1);
        assert!(built.recommended_base > built.a && built.recommended_base < built.b);
        // The solved system reports how far b sits from the nominal 1.
        assert!(built.b_offset_from_one < 0.5);
    }

    #[test]
    fn newton_restart_stability() {
        let reference = build_h().unwrap();
        for bump in [1.02, 0.98, 1.05] {
            let mut spec = h_spec();
            for slot in spec.slots.iter_mut() {
                if let Slot::Free { initial } = slot {
                    *initial *= bump;
                }
            }
            let solved = spec.solve().unwrap();
            for (a, b) in solved.slots.iter().zip(&reference.solved.slots) {
                assert!((a - b).abs() < 1e-8, "restart drifted: {a} vs {b}");
            }
        }
    }

    #[test]
    fn power_map_is_monomial() {
        let p = power_map(6);
        assert_eq!(p.degree(), 6);
        assert_eq!(p.coeffs()[6], Complex64::new(1.0, 0.0));
    }
}
