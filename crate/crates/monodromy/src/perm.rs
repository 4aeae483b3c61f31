//! Permutations of `{1..m}` with cycle notation, composition, and powers.
//!
//! Points are 1-based throughout, matching the labels `x_1..x_d` used for
//! real fibers. The composition convention is fixed once and for all:
//! `compose(p, q)` applies `q` first, so `(p ∘ q)(x) = p(q(x))`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("image table is not a bijection of 1..={0}")]
    NotBijective(usize),
    #[error("point {point} out of range 1..={degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("cannot parse cycle notation: {0}")]
    Parse(String),
}

/// A permutation of `{1..m}`, stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Perm {
    /// `images[i]` is the image of point `i + 1`, itself a 1-based label.
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm {
            images: (1..=degree).collect(),
        }
    }

    /// Build from a 1-based image table: `images[i]` is the image of `i + 1`.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            if x == 0 || x > m {
                return Err(PermError::NotBijective(m));
            }
            if seen[x - 1] {
                return Err(PermError::NotBijective(m));
            }
            seen[x - 1] = true;
        }
        Ok(Perm { images })
    }

    /// Build from disjoint cycles over `{1..m}`; points not mentioned are fixed.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (1..=degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for window in 0..cycle.len() {
                let from = cycle[window];
                let to = cycle[(window + 1) % cycle.len()];
                if from == 0 || from > degree {
                    return Err(PermError::PointOutOfRange {
                        point: from,
                        degree,
                    });
                }
                if touched[from - 1] {
                    return Err(PermError::NotBijective(degree));
                }
                touched[from - 1] = true;
                images[from - 1] = to;
            }
        }
        Perm::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 1-based point `x`.
    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| x == i + 1)
    }

    /// `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &Perm) -> Result<Perm, PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(Perm {
            images: (1..=self.degree())
                .map(|x| self.apply(other.apply(x)))
                .collect(),
        })
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x - 1] = i + 1;
        }
        Perm { images }
    }

    pub fn pow(&self, k: i64) -> Perm {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut exp = k.unsigned_abs();
        let mut acc = Perm::identity(self.degree());
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.compose(&sq).expect("equal degrees");
            }
            sq = sq.compose(&sq).expect("equal degrees");
            exp >>= 1;
        }
        acc
    }

    /// Nontrivial cycles, each starting at its least point, sorted by least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let m = self.degree();
        let mut seen = vec![false; m];
        let mut out = Vec::new();
        for start in 1..=m {
            if seen[start - 1] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start - 1] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x - 1] = true;
                cycle.push(x);
                x = self.apply(x);
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (1..=self.degree()).filter(|&x| self.apply(x) == x).collect()
    }

    /// Cycle type as a descending list of cycle lengths, fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        lens.extend(std::iter::repeat_n(1, self.fixed_points().len()));
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    /// Order of the permutation: lcm of its cycle lengths.
    pub fn order(&self) -> u128 {
        self.cycles()
            .iter()
            .map(|c| c.len() as u128)
            .fold(1u128, num_integer::lcm)
    }

    /// True iff the permutation is a single cycle through all points.
    pub fn is_full_cycle(&self) -> bool {
        let cycles = self.cycles();
        cycles.len() == 1 && cycles[0].len() == self.degree()
    }

    /// Conjugate `t ∘ self ∘ t⁻¹`.
    pub fn conjugate_by(&self, t: &Perm) -> Perm {
        let m = self.degree();
        let mut images = vec![0; m];
        for x in 1..=m {
            images[t.apply(x) - 1] = t.apply(self.apply(x));
        }
        Perm { images }
    }

    /// Parse cycle notation such as `(2 3)(4 5)` with an explicit degree.
    /// `()`, `id`, and the empty string all denote the identity.
    pub fn parse(degree: usize, text: &str) -> Result<Perm, PermError> {
        let text = text.trim();
        if text.is_empty() || text == "()" || text == "id" {
            return Ok(Perm::identity(degree));
        }
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            if !rest.starts_with('(') {
                return Err(PermError::Parse(format!("expected '(' in {text:?}")));
            }
            let close = rest
                .find(')')
                .ok_or_else(|| PermError::Parse(format!("unbalanced '(' in {text:?}")))?;
            let body = &rest[1..close];
            let cycle: Vec<usize> = body
                .split([' ', ','])
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| PermError::Parse(format!("bad point {s:?} in {text:?}")))
                })
                .collect::<Result<_, _>>()?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = rest[close + 1..].trim_start();
        }
        Perm::from_cycles(degree, &cycles)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cycle in cycles {
            write!(f, "(")?;
            for (i, point) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{point}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm[{}]{}", self.degree(), self)
    }
}
