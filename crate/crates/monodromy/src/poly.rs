//! Dense complex polynomials: Horner evaluation, derivatives, simultaneous
//! root finding, critical data, preimage trees, and Newton
//! predictor–corrector continuation of fibers along plane paths.

use num_complex::Complex64;
use thiserror::Error;

use crate::hurwitz::CriticalPortrait;
use crate::path::PlanePath;

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("polynomial has no nonzero coefficient")]
    ZeroPolynomial,
    #[error("operation needs degree ≥ 1")]
    ConstantPolynomial,
    #[error("root finding did not converge; residuals {0:?}")]
    NoConvergence(Vec<f64>),
    #[error("degenerate base point: preimages collide within tolerance; pick a different base")]
    DegenerateBasePoint,
    #[error("continuation step underflow at piece {piece}, parameter {t}")]
    StepUnderflow { piece: usize, t: f64 },
    #[error("fiber endpoints do not match the start fiber bijectively")]
    FiberMismatch,
    #[error("cannot parse coefficient file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone)]
pub struct RootConfig {
    /// Residual acceptance relative to the coefficient scale at the point.
    pub residual_tol: f64,
    /// Distance below which approximations are merged outright.
    pub cluster_tol: f64,
    /// Relative tolerance for certifying a multiple root via derivatives.
    pub certify_tol: f64,
    pub max_iterations: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            residual_tol: 1e-12,
            cluster_tol: 1e-8,
            certify_tol: 1e-8,
            max_iterations: 600,
        }
    }
}

/// Dense polynomial, coefficients ascending by exponent, leading coefficient
/// kept significant relative to the largest coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

const TRIM_REL: f64 = 1e-12;

impl Poly {
    /// Drop exactly-zero leading coefficients, keeping at least one entry.
    fn normalized(mut coeffs: Vec<Complex64>) -> Poly {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self, NumericError> {
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return Err(NumericError::ZeroPolynomial);
        }
        while coeffs
            .last()
            .is_some_and(|c| c.norm() <= TRIM_REL * max)
        {
            coeffs.pop();
        }
        Ok(Poly { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, NumericError> {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
        coeffs[degree] = Complex64::new(1.0, 0.0);
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_real(&self) -> bool {
        let max = self.coeff_norm();
        self.coeffs.iter().all(|c| c.im.abs() <= 1e-10 * max)
    }

    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Σ |a_k| r^k, the natural magnitude scale of evaluations at |z| = r.
    pub fn scale_at(&self, r: f64) -> f64 {
        let mut scale = 0.0;
        let mut power = 1.0;
        for c in &self.coeffs {
            scale += c.norm() * power;
            power *= r;
        }
        scale.max(f64::MIN_POSITIVE)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly {
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        }
    }

    pub fn sub_const(&self, c: Complex64) -> Poly {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] -= c;
        Poly { coeffs }
    }

    /// Value of the n-th iterate at z.
    pub fn eval_iterate(&self, n: usize, z: Complex64) -> Complex64 {
        let mut v = z;
        for _ in 0..n {
            v = self.eval(v);
        }
        v
    }

    /// Value and derivative of the n-th iterate by the chain rule.
    pub fn eval_iterate_with_derivative(&self, n: usize, z: Complex64) -> (Complex64, Complex64) {
        let dp = self.derivative();
        let mut v = z;
        let mut d = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            d *= dp.eval(v);
            v = self.eval(v);
        }
        (v, d)
    }

    /// Scale for residuals of `iterate(n)(z) = target`: the evaluation scale
    /// of the last application.
    fn iterate_scale(&self, n: usize, z: Complex64) -> f64 {
        let mut v = z;
        for _ in 0..n.saturating_sub(1) {
            v = self.eval(v);
        }
        self.scale_at(v.norm())
    }

    // ----- arithmetic helpers used by the constructors -----

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        Poly::normalized(coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut coeffs =
            vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::normalized(coeffs)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Composition self ∘ inner.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly {
            coeffs: vec![Complex64::new(0.0, 0.0)],
        };
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] += c;
        }
        acc
    }

    /// Antiderivative with value 0 at the origin.
    pub fn antiderivative(&self) -> Poly {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k + 1] = c / (k as f64 + 1.0);
        }
        Poly { coeffs }
    }

    /// Coefficient file format: one coefficient per line, ascending,
    /// `re` or `re im`, decimal text.
    pub fn to_coeff_file(&self) -> String {
        let mut out = String::new();
        for c in &self.coeffs {
            if self.is_real() {
                out.push_str(&format!("{:.17e}\n", c.re));
            } else {
                out.push_str(&format!("{:.17e} {:.17e}\n", c.re, c.im));
            }
        }
        out
    }

    pub fn from_coeff_file(text: &str) -> Result<Self, NumericError> {
        let mut coeffs = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let re: f64 = parts
                .first()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| NumericError::Parse(format!("bad line {line:?}")))?;
            let im: f64 = match parts.get(1) {
                Some(s) => s
                    .parse()
                    .map_err(|_| NumericError::Parse(format!("bad line {line:?}")))?,
                None => 0.0,
            };
            coeffs.push(Complex64::new(re, im));
        }
        Poly::new(coeffs)
    }
}

/// A located root with clustered multiplicity.
#[derive(Debug, Clone)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

/// Simultaneous root finding: Aberth–Ehrlich iteration from perturbed-circle
/// initial points, Newton polish, then cluster detection by inclusion-disk
/// overlap with derivative-based certification of multiple roots.
pub fn all_roots(poly: &Poly, cfg: &RootConfig) -> Result<Vec<Root>, NumericError> {
    if poly.degree() == 0 {
        return Err(NumericError::ConstantPolynomial);
    }
    // Exact zero roots split off cleanly (monomials and exact constructions).
    let mut zero_mult = 0usize;
    let mut coeffs = poly.coeffs.clone();
    while coeffs.first().is_some_and(|c| c.norm() == 0.0) && coeffs.len() > 1 {
        coeffs.remove(0);
        zero_mult += 1;
    }
    let reduced = Poly { coeffs };
    let mut roots = if reduced.degree() == 0 {
        Vec::new()
    } else if reduced.degree() == 1 {
        let r = -reduced.coeffs[0] / reduced.coeffs[1];
        vec![Root {
            value: r,
            multiplicity: 1,
            residual: reduced.eval(r).norm(),
        }]
    } else {
        aberth_roots(&reduced, cfg)?
    };
    if zero_mult > 0 {
        roots.push(Root {
            value: Complex64::new(0.0, 0.0),
            multiplicity: zero_mult,
            residual: 0.0,
        });
    }
    // Merge any root pair within the plain cluster tolerance.
    let scale = 1.0 + roots.iter().map(|r| r.value.norm()).fold(0.0, f64::max);
    let mut merged: Vec<Root> = Vec::new();
    'outer: for r in roots {
        for m in merged.iter_mut() {
            if (m.value - r.value).norm() <= cfg.cluster_tol * scale {
                m.multiplicity += r.multiplicity;
                continue 'outer;
            }
        }
        merged.push(r);
    }
    merged.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .expect("finite roots")
    });
    debug_assert_eq!(
        merged.iter().map(|r| r.multiplicity).sum::<usize>(),
        poly.degree()
    );
    Ok(merged)
}

fn aberth_roots(poly: &Poly, cfg: &RootConfig) -> Result<Vec<Root>, NumericError> {
    let deg = poly.degree();
    let lead = *poly.coeffs.last().expect("nonempty");
    let dp = poly.derivative();
    // Cauchy bound for the initial circle, with an angular offset to avoid
    // locking onto coefficient symmetries.
    let radius = 1.0
        + poly.coeffs[..deg]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / deg as f64 + 0.41;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let converged = |z: &[Complex64]| {
        z.iter()
            .all(|&zi| poly.eval(zi).norm() <= cfg.residual_tol * poly.scale_at(zi.norm()))
    };
    for _ in 0..cfg.max_iterations {
        if converged(&z) {
            break;
        }
        let mut max_move: f64 = 0.0;
        for i in 0..deg {
            let pi = poly.eval(z[i]);
            let di = dp.eval(z[i]);
            let newton = if di.norm() > 1e-300 {
                pi / di
            } else {
                Complex64::new(1e-8, 1e-8)
            };
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 1e-300 {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * s;
            let w = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            z[i] -= w;
            max_move = max_move.max(w.norm());
        }
        if max_move < 1e-16 * (1.0 + radius) {
            break;
        }
    }

    // Newton polish for well-separated approximations.
    for zi in z.iter_mut() {
        let mut best = *zi;
        let mut best_res = poly.eval(best).norm();
        let mut cur = *zi;
        for _ in 0..24 {
            let d = dp.eval(cur);
            if d.norm() < 1e-300 {
                break;
            }
            cur -= poly.eval(cur) / d;
            let res = poly.eval(cur).norm();
            if res < best_res {
                best_res = res;
                best = cur;
            }
        }
        *zi = best;
    }

    // Inclusion disks: a disk of radius deg·|p(z_i)| / (|lead|·∏|z_i − z_j|)
    // around each approximation contains a true root; overlapping disks are
    // clustered together.
    let radii: Vec<f64> = (0..deg)
        .map(|i| {
            let mut prod = 1.0f64;
            for j in 0..deg {
                if j != i {
                    prod *= (z[i] - z[j]).norm();
                }
            }
            if prod < 1e-300 {
                f64::INFINITY
            } else {
                deg as f64 * poly.eval(z[i]).norm() / (lead.norm() * prod)
            }
        })
        .collect();
    let mut parent: Vec<usize> = (0..deg).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let scale = 1.0 + z.iter().map(|p| p.norm()).fold(0.0, f64::max);
    for i in 0..deg {
        for j in (i + 1)..deg {
            let dist = (z[i] - z[j]).norm();
            let touching = dist <= 2.0 * (radii[i] + radii[j]) || dist <= cfg.cluster_tol * scale;
            if touching {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..deg {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }

    let mut out = Vec::new();
    let mut failures = Vec::new();
    for members in clusters.values() {
        let k = members.len();
        if k == 1 {
            let zi = z[members[0]];
            let res = poly.eval(zi).norm();
            if res > cfg.residual_tol * poly.scale_at(zi.norm()) * 10.0 {
                failures.push(res);
            }
            out.push(Root {
                value: zi,
                multiplicity: 1,
                residual: res,
            });
            continue;
        }
        // Candidate k-fold root: refine the centroid on the (k−1)-st
        // derivative, where a genuine k-fold root is simple, then certify
        // through the lower derivatives.
        let centroid = members.iter().map(|&i| z[i]).sum::<Complex64>() / k as f64;
        let mut derivs = vec![poly.clone()];
        for _ in 0..k {
            derivs.push(derivs.last().expect("nonempty").derivative());
        }
        let target = &derivs[k - 1];
        let target_d = &derivs[k];
        let mut mu = centroid;
        for _ in 0..40 {
            let d = target_d.eval(mu);
            if d.norm() < 1e-300 {
                break;
            }
            let step = target.eval(mu) / d;
            mu -= step;
            if step.norm() < 1e-16 * (1.0 + mu.norm()) {
                break;
            }
        }
        let certified = (0..k).all(|j| {
            derivs[j].eval(mu).norm() <= cfg.certify_tol * derivs[j].scale_at(mu.norm())
        });
        if certified {
            out.push(Root {
                value: mu,
                multiplicity: k,
                residual: poly.eval(mu).norm(),
            });
        } else {
            // Not a genuine multiple root; keep the members as simple roots.
            for &i in members {
                let zi = z[i];
                let res = poly.eval(zi).norm();
                if res > cfg.residual_tol * poly.scale_at(zi.norm()) * 10.0 {
                    failures.push(res);
                }
                out.push(Root {
                    value: zi,
                    multiplicity: 1,
                    residual: res,
                });
            }
        }
    }
    if !failures.is_empty() {
        return Err(NumericError::NoConvergence(failures));
    }
    Ok(out)
}

/// Critical points with local degrees, critical values merged by proximity,
/// and the forward orbit of the critical values.
#[derive(Debug, Clone)]
pub struct CriticalData {
    /// (critical point, local degree ≥ 2)
    pub points: Vec<(Complex64, usize)>,
    /// Distinct critical values, each with the local degrees above it.
    pub values: Vec<(Complex64, Vec<usize>)>,
    /// Forward images of the critical values up to the requested depth,
    /// merged by proximity; contains the critical values themselves.
    pub post_critical: Vec<Complex64>,
    /// The forward orbit closed up before the depth ran out, so the
    /// polynomial is post-critically finite at this tolerance.
    pub post_critical_finite: bool,
}

pub fn critical_data(
    poly: &Poly,
    depth: usize,
    cfg: &RootConfig,
) -> Result<CriticalData, NumericError> {
    let dp = poly.derivative();
    let roots = all_roots(&dp, cfg)?;
    let points: Vec<(Complex64, usize)> = roots
        .iter()
        .map(|r| (r.value, r.multiplicity + 1))
        .collect();
    let merge_tol = |vals: &[Complex64]| {
        let scale = 1.0 + vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        cfg.cluster_tol * scale * 10.0
    };
    // Merge critical values by proximity, collecting local degrees.
    let images: Vec<(Complex64, usize)> = points
        .iter()
        .map(|&(c, k)| (poly.eval(c), k))
        .collect();
    let tol = merge_tol(&images.iter().map(|x| x.0).collect::<Vec<_>>());
    let mut values: Vec<(Complex64, Vec<usize>)> = Vec::new();
    'outer: for (v, k) in images {
        for (w, degs) in values.iter_mut() {
            if (*w - v).norm() <= tol {
                degs.push(k);
                degs.sort_unstable_by(|a, b| b.cmp(a));
                continue 'outer;
            }
        }
        values.push((v, vec![k]));
    }
    values.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .expect("finite")
    });
    // Forward orbit with coincidence merging.
    let mut post: Vec<Complex64> = Vec::new();
    let mut frontier: Vec<Complex64> = values.iter().map(|v| v.0).collect();
    let mut finite = false;
    for _ in 0..depth {
        let mut next = Vec::new();
        for v in frontier {
            let known = post.iter().any(|&w| (w - v).norm() <= tol);
            if !known {
                post.push(v);
                next.push(poly.eval(v));
            }
        }
        if next.is_empty() {
            finite = true;
            break;
        }
        frontier = next;
    }
    post.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).expect("finite"));
    Ok(CriticalData {
        points,
        values,
        post_critical: post,
        post_critical_finite: finite,
    })
}

impl CriticalData {
    pub fn portrait(&self, degree: usize) -> Result<CriticalPortrait, crate::hurwitz::HurwitzError> {
        CriticalPortrait::new(
            degree,
            self.values.iter().map(|(_, degs)| degs.clone()).collect(),
        )
    }

    /// All post-critical points are (numerically) real.
    pub fn post_critical_real(&self) -> bool {
        let scale = 1.0
            + self
                .post_critical
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
        self.post_critical.iter().all(|v| v.im.abs() <= 1e-8 * scale)
    }
}

/// The tree of iterated preimages of a base point.
#[derive(Debug, Clone)]
pub struct PreimageTree {
    pub base: Complex64,
    pub degree: usize,
    pub height: usize,
    /// `levels[k]` has d^k points; `parents[k][i]` indexes into level k−1.
    pub levels: Vec<Vec<Complex64>>,
    pub parents: Vec<Vec<usize>>,
}

pub fn preimage_tree(
    poly: &Poly,
    base: Complex64,
    height: usize,
    cfg: &RootConfig,
) -> Result<PreimageTree, NumericError> {
    let degree = poly.degree();
    let mut levels = vec![vec![base]];
    let mut parents = vec![vec![0usize]];
    for _ in 1..=height {
        let prior = levels.last().expect("nonempty");
        let mut level = Vec::with_capacity(prior.len() * degree);
        let mut parent = Vec::with_capacity(prior.len() * degree);
        for (pi, &p) in prior.iter().enumerate() {
            let shifted = poly.sub_const(p);
            let roots = all_roots(&shifted, cfg)?;
            if roots.len() != degree || roots.iter().any(|r| r.multiplicity != 1) {
                return Err(NumericError::DegenerateBasePoint);
            }
            for r in roots {
                level.push(r.value);
                parent.push(pi);
            }
        }
        // Distinctness across the whole level.
        let scale = 1.0 + level.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..level.len() {
            for j in (i + 1)..level.len() {
                if (level[i] - level[j]).norm() <= cfg.cluster_tol * scale {
                    return Err(NumericError::DegenerateBasePoint);
                }
            }
        }
        levels.push(level);
        parents.push(parent);
    }
    Ok(PreimageTree {
        base,
        degree,
        height,
        levels,
        parents,
    })
}

#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    /// Steps in piece-local parameter units.
    pub max_step: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub growth: f64,
    pub newton_iterations: usize,
    pub residual_tol: f64,
    /// Record the polyline of every tracked point.
    pub record_tracks: bool,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            max_step: 0.125,
            initial_step: 1.0 / 16.0,
            min_step: 1e-10,
            growth: 1.4,
            newton_iterations: 8,
            residual_tol: 1e-11,
            record_tracks: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Continuation {
    pub endpoints: Vec<Complex64>,
    /// Per tracked point: the polyline of accepted positions.
    pub tracks: Vec<Vec<Complex64>>,
    pub accepted_steps: usize,
}

/// Track the full fiber of `poly^(∘ n)` over a path. Predictor is the
/// previous point; corrector is Newton on the composed map. A step is
/// accepted only when every corrector converges within the iteration budget
/// and the largest move is below half the minimal pairwise separation of
/// the previous fiber; otherwise the step halves.
pub fn continue_fiber(
    poly: &Poly,
    n: usize,
    path: &PlanePath,
    start: &[Complex64],
    cfg: &ContinuationConfig,
) -> Result<Continuation, NumericError> {
    let mut points: Vec<Complex64> = start.to_vec();
    let mut tracks: Vec<Vec<Complex64>> = if cfg.record_tracks {
        start.iter().map(|&z| vec![z]).collect()
    } else {
        Vec::new()
    };
    let mut accepted = 0usize;
    for (piece_idx, piece) in path.pieces().iter().enumerate() {
        let mut s = 0.0f64;
        let mut h = cfg.initial_step;
        while s < 1.0 {
            h = h.min(cfg.max_step).min(1.0 - s);
            let target = piece.point(s + h);
            let min_sep = min_pairwise_separation(&points);
            let mut proposal = Vec::with_capacity(points.len());
            let mut ok = true;
            let mut max_move = 0.0f64;
            for &z0 in &points {
                match newton_to_target(poly, n, z0, target, cfg) {
                    Some(z1) => {
                        max_move = max_move.max((z1 - z0).norm());
                        proposal.push(z1);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && (points.len() < 2 || max_move < 0.5 * min_sep) {
                points = proposal;
                s += h;
                accepted += 1;
                if cfg.record_tracks {
                    for (track, &z) in tracks.iter_mut().zip(&points) {
                        track.push(z);
                    }
                }
                h *= cfg.growth;
            } else {
                h *= 0.5;
                if h < cfg.min_step {
                    return Err(NumericError::StepUnderflow {
                        piece: piece_idx,
                        t: s,
                    });
                }
            }
        }
    }
    Ok(Continuation {
        endpoints: points,
        tracks,
        accepted_steps: accepted,
    })
}

fn newton_to_target(
    poly: &Poly,
    n: usize,
    start: Complex64,
    target: Complex64,
    cfg: &ContinuationConfig,
) -> Option<Complex64> {
    let mut z = start;
    let scale = poly.iterate_scale(n, start).max(1.0 + target.norm());
    for _ in 0..cfg.newton_iterations {
        let (v, d) = poly.eval_iterate_with_derivative(n, z);
        let r = v - target;
        if r.norm() <= cfg.residual_tol * scale {
            return Some(z);
        }
        if d.norm() < 1e-300 {
            return None;
        }
        z -= r / d;
    }
    let (v, _) = poly.eval_iterate_with_derivative(n, z);
    if (v - target).norm() <= cfg.residual_tol * scale {
        Some(z)
    } else {
        None
    }
}

pub fn min_pairwise_separation(points: &[Complex64]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            min = min.min((points[i] - points[j]).norm());
        }
    }
    min
}

/// Match continuation endpoints back to the start fiber as a permutation:
/// `perm(i) = j` when the point that started at position i ends at the
/// start-position j.
pub fn loop_permutation(
    start: &[Complex64],
    endpoints: &[Complex64],
) -> Result<crate::perm::Perm, NumericError> {
    if start.len() != endpoints.len() {
        return Err(NumericError::FiberMismatch);
    }
    let min_sep = min_pairwise_separation(start);
    let mut images = vec![0usize; start.len()];
    let mut used = vec![false; start.len()];
    for (i, &e) in endpoints.iter().enumerate() {
        let (j, dist) = start
            .iter()
            .enumerate()
            .map(|(j, &s)| (j, (e - s).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
            .expect("nonempty fiber");
        if dist > 0.25 * min_sep || used[j] {
            return Err(NumericError::FiberMismatch);
        }
        used[j] = true;
        images[i] = j + 1;
    }
    crate::perm::Perm::from_images(images).map_err(|_| NumericError::FiberMismatch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{Piece, PlanePath};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_and_derivative() {
        let p = Poly::from_real(&[-1.0, 0.0, 1.0]).unwrap(); // z² − 1
        assert_eq!(p.eval(c(2.0, 0.0)), c(3.0, 0.0));
        // d/dz z⁶/6 = z⁵
        let q = Poly::from_real(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / 6.0]).unwrap();
        let dq = q.derivative();
        assert_eq!(dq.degree(), 5);
        assert!((dq.eval(c(2.0, 0.0)) - c(32.0, 0.0)).norm() < 1e-12);
        // Fixed critical point of the conservative cubic −2z³ + 3z².
        let cubic = Poly::from_real(&[0.0, 0.0, 3.0, -2.0]).unwrap();
        assert!((cubic.eval(c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn roots_of_quadratic() {
        let p = Poly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let roots = all_roots(&p, &RootConfig::default()).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].value - c(-1.0, 0.0)).norm() < 1e-10);
        assert!((roots[1].value - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn triple_root_at_origin() {
        let p = Poly::monomial(3);
        let roots = all_roots(&p, &RootConfig::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 3);
        assert!(roots[0].value.norm() < 1e-10);
    }

    #[test]
    fn shifted_multiple_root_cluster() {
        // (z − 1)⁴ expanded: inexact arithmetic forces the cluster path.
        let base = Poly::from_real(&[-1.0, 1.0]).unwrap();
        let mut p = Poly::from_real(&[1.0]).unwrap();
        for _ in 0..4 {
            p = p.mul(&base);
        }
        let roots = all_roots(&p, &RootConfig::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 4);
        assert!((roots[0].value - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn wilkinson_mild_recovery() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..10 {
            let n = rng.gen_range(4..=12usize);
            let mut targets: Vec<f64> = Vec::new();
            while targets.len() < n {
                let x = rng.gen_range(-2.0..2.0);
                if targets.iter().all(|t| (t - x).abs() >= 1e-2) {
                    targets.push(x);
                }
            }
            let mut p = Poly::from_real(&[1.0]).unwrap();
            for &t in &targets {
                p = p.mul(&Poly::from_real(&[-t, 1.0]).unwrap());
            }
            let roots = all_roots(&p, &RootConfig::default()).unwrap();
            assert_eq!(roots.len(), n);
            targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (r, t) in roots.iter().zip(&targets) {
                assert!(
                    (r.value - c(*t, 0.0)).norm() < 1e-8,
                    "root {} vs {t}",
                    r.value
                );
                assert_eq!(r.multiplicity, 1);
            }
        }
    }

    #[test]
    fn critical_data_of_monomial() {
        let p = Poly::monomial(5);
        let data = critical_data(&p, 3, &RootConfig::default()).unwrap();
        assert_eq!(data.points.len(), 1);
        assert_eq!(data.points[0].1, 5); // local degree d at the origin
        assert_eq!(data.values.len(), 1);
        assert!(data.values[0].0.norm() < 1e-10);
        assert_eq!(data.post_critical.len(), 1);
    }

    #[test]
    fn preimage_tree_of_squaring() {
        let p = Poly::monomial(2);
        let tree = preimage_tree(&p, c(1.0, 0.0), 2, &RootConfig::default()).unwrap();
        assert_eq!(tree.levels[2].len(), 4);
        let mut found = tree.levels[2].clone();
        found.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let expected = [c(-1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)];
        for (f, e) in found.iter().zip(&expected) {
            assert!((f - e).norm() < 1e-9);
        }
        // Residual invariant: children map onto their parents.
        for k in 1..=2 {
            for (i, &z) in tree.levels[k].iter().enumerate() {
                let parent = tree.levels[k - 1][tree.parents[k][i]];
                assert!((p.eval(z) - parent).norm() < 1e-9 * (1.0 + parent.norm()));
            }
        }
    }

    #[test]
    fn degenerate_base_point_rejected() {
        let p = Poly::monomial(2);
        // Base 0 has a double preimage.
        assert!(matches!(
            preimage_tree(&p, c(0.0, 0.0), 1, &RootConfig::default()),
            Err(NumericError::DegenerateBasePoint)
        ));
    }

    #[test]
    fn continuation_constant_path_is_identity() {
        let p = Poly::monomial(2);
        let path = PlanePath::new(vec![Piece::segment(c(1.0, 0.0), c(1.0, 0.0))]);
        let start = [c(1.0, 0.0), c(-1.0, 0.0)];
        let cont = continue_fiber(&p, 1, &path, &start, &ContinuationConfig::default()).unwrap();
        let perm = loop_permutation(&start, &cont.endpoints).unwrap();
        assert!(perm.is_identity());
    }

    #[test]
    fn continuation_square_root_swap() {
        // The unit circle once around the origin swaps the two square roots:
        // the analytic continuation of √z along e^{iθ} is e^{iθ/2}.
        let p = Poly::monomial(2);
        let path = PlanePath::new(vec![Piece::arc(
            c(0.0, 0.0),
            1.0,
            0.0,
            2.0 * std::f64::consts::PI,
        )]);
        let start = [c(1.0, 0.0), c(-1.0, 0.0)];
        let cont = continue_fiber(&p, 1, &path, &start, &ContinuationConfig::default()).unwrap();
        let perm = loop_permutation(&start, &cont.endpoints).unwrap();
        assert_eq!(perm, crate::perm::Perm::parse(2, "(1 2)").unwrap());
    }

    #[test]
    fn continuation_closed_path_permutes_fiber() {
        let p = Poly::from_real(&[0.5, -1.0, 0.0, 1.0]).unwrap(); // z³ − z + ½
        let base = c(3.0, 0.0);
        let tree = preimage_tree(&p, base, 1, &RootConfig::default()).unwrap();
        let start = tree.levels[1].clone();
        let path = PlanePath::new(vec![Piece::arc(
            base,
            0.5,
            0.0,
            2.0 * std::f64::consts::PI,
        )]);
        let cont = continue_fiber(&p, 1, &path, &start, &ContinuationConfig::default()).unwrap();
        // Small nullhomotopic circle away from critical values: identity.
        let perm = loop_permutation(&start, &cont.endpoints).unwrap();
        assert!(perm.is_identity());
    }

    #[test]
    fn continuation_invariant_under_step_halving() {
        let p = Poly::monomial(3);
        let path = PlanePath::new(vec![Piece::arc(
            c(0.0, 0.0),
            1.0,
            0.3,
            2.0 * std::f64::consts::PI,
        )]);
        let start: Vec<Complex64> = (0..3)
            .map(|k| Complex64::from_polar(1.0, (0.3 + 2.0 * std::f64::consts::PI * k as f64) / 3.0))
            .collect();
        let cfg = ContinuationConfig::default();
        let halved = ContinuationConfig {
            max_step: cfg.max_step / 2.0,
            initial_step: cfg.initial_step / 2.0,
            ..cfg.clone()
        };
        let a = continue_fiber(&p, 1, &path, &start, &cfg).unwrap();
        let b = continue_fiber(&p, 1, &path, &start, &halved).unwrap();
        let pa = loop_permutation(&start, &a.endpoints).unwrap();
        let pb = loop_permutation(&start, &b.endpoints).unwrap();
        assert_eq!(pa, pb);
        assert!(pa.is_full_cycle());
    }

    #[test]
    fn coeff_file_roundtrip() {
        let p = Poly::from_real(&[0.25, -1.5, 0.0, 2.0]).unwrap();
        let q = Poly::from_coeff_file(&p.to_coeff_file()).unwrap();
        assert_eq!(p, q);
        assert!(Poly::from_coeff_file("garbage\n").is_err());
    }
}
