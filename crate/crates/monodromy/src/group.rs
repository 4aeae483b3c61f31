//! Finitely generated permutation groups: orbits, transitivity, and exact
//! order via breadth-first closure or a Schreier–Sims stabilizer chain.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::OnceLock;

use thiserror::Error;

use crate::perm::Perm;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("generator degree {0} does not match group degree {1}")]
    DegreeMismatch(usize, usize),
    #[error("closure exceeded the element cap of {0}")]
    ClosureCapExceeded(usize),
    #[error("group must be transitive for this operation")]
    NotTransitive,
}

pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// A permutation group given by generators, with lazily computed closure
/// and stabilizer chain. Immutable after construction.
pub struct GeneratedGroup {
    degree: usize,
    generators: Vec<Perm>,
    closure: OnceLock<Option<HashSet<Perm>>>,
    chain: OnceLock<StabChain>,
    closure_cap: usize,
}

impl GeneratedGroup {
    pub fn new(degree: usize, generators: Vec<Perm>) -> Result<Self, GroupError> {
        for g in &generators {
            if g.degree() != degree {
                return Err(GroupError::DegreeMismatch(g.degree(), degree));
            }
        }
        Ok(GeneratedGroup {
            degree,
            generators,
            closure: OnceLock::new(),
            chain: OnceLock::new(),
            closure_cap: DEFAULT_CLOSURE_CAP,
        })
    }

    pub fn with_closure_cap(mut self, cap: usize) -> Self {
        self.closure_cap = cap;
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    /// Orbit of a point under the group.
    pub fn orbit(&self, point: usize) -> BTreeSet<usize> {
        let mut orbit = BTreeSet::from([point]);
        let mut queue = VecDeque::from([point]);
        while let Some(x) = queue.pop_front() {
            for g in &self.generators {
                let y = g.apply(x);
                if orbit.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        orbit
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || self.orbit(1).len() == self.degree
    }

    /// Doubly transitive iff the orbit of the ordered pair (1, 2) has size m(m−1).
    pub fn is_doubly_transitive(&self) -> bool {
        let m = self.degree;
        if m < 2 {
            return false;
        }
        let mut seen = vec![false; m * m];
        let idx = |a: usize, b: usize| (a - 1) * m + (b - 1);
        let mut queue = VecDeque::from([(1usize, 2usize)]);
        seen[idx(1, 2)] = true;
        let mut count = 1usize;
        while let Some((a, b)) = queue.pop_front() {
            for g in &self.generators {
                let (x, y) = (g.apply(a), g.apply(b));
                if !seen[idx(x, y)] {
                    seen[idx(x, y)] = true;
                    count += 1;
                    queue.push_back((x, y));
                }
            }
        }
        count == m * (m - 1)
    }

    /// Breadth-first closure of the generators, capped. A capped-out
    /// computation is cached as `None` and re-reported as `ClosureCapExceeded`.
    pub fn closure(&self) -> Result<&HashSet<Perm>, GroupError> {
        let cap = self.closure_cap;
        let cell = self.closure.get_or_init(|| {
            let mut elems: HashSet<Perm> = HashSet::new();
            elems.insert(Perm::identity(self.degree));
            let mut queue: VecDeque<Perm> = VecDeque::from([Perm::identity(self.degree)]);
            while let Some(x) = queue.pop_front() {
                for g in &self.generators {
                    let y = g.compose(&x).expect("equal degrees");
                    if !elems.contains(&y) {
                        if elems.len() >= cap {
                            return None;
                        }
                        elems.insert(y.clone());
                        queue.push_back(y);
                    }
                }
            }
            Some(elems)
        });
        cell.as_ref().ok_or(GroupError::ClosureCapExceeded(cap))
    }

    /// Group order by closure when it fits under the cap, otherwise by the
    /// stabilizer chain.
    pub fn order(&self) -> u128 {
        match self.closure() {
            Ok(elems) => elems.len() as u128,
            Err(_) => self.stab_chain().order(),
        }
    }

    /// Group order from the stabilizer chain alone.
    pub fn order_via_stabilizer_chain(&self) -> u128 {
        self.stab_chain().order()
    }

    pub fn stab_chain(&self) -> &StabChain {
        self.chain
            .get_or_init(|| StabChain::build(self.degree, &self.generators))
    }

    /// Membership test; uses the closure when already computed, else sifts
    /// through the stabilizer chain.
    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.degree {
            return false;
        }
        if let Some(Some(elems)) = self.closure.get() {
            return elems.contains(g);
        }
        self.stab_chain().contains(g)
    }
}

/// One level of the stabilizer chain. Generators placed here fix the base
/// points of all shallower levels; the level acts with its own generators
/// plus those of every deeper level.
struct ChainLevel {
    base_point: usize,
    placed: Vec<Perm>,
    /// `transversal[x - 1] = Some(u)` with `u(base_point) = x` for orbit points.
    transversal: Vec<Option<Perm>>,
    orbit: Vec<usize>,
}

/// Deterministic Schreier–Sims stabilizer chain.
///
/// Level `i` represents `G_i = ⟨placed generators of levels ≥ i⟩`; the build
/// loop enforces `Stab_{G_i}(b_i) = G_{i+1}` by sifting every Schreier
/// generator and placing nontrivial residues at the level where the sift
/// failed, then re-verifying from scratch. Quadratic in the number of strong
/// generators, which is fine at the degrees used here (≤ a few hundred).
pub struct StabChain {
    degree: usize,
    levels: Vec<ChainLevel>,
}

impl StabChain {
    pub fn build(degree: usize, generators: &[Perm]) -> Self {
        let mut chain = StabChain {
            degree,
            levels: Vec::new(),
        };
        for g in generators {
            if !g.is_identity() {
                chain.place(0, g.clone());
            }
        }
        loop {
            chain.rebuild_orbits();
            match chain.verification_failure() {
                None => break,
                Some((level, residue)) => chain.place(level, residue),
            }
        }
        chain
    }

    /// Place a nontrivial element known to fix the base points of levels
    /// `< level`; creates the level if it does not exist yet.
    fn place(&mut self, level: usize, g: Perm) {
        debug_assert!(!g.is_identity());
        debug_assert!(self.levels[..level.min(self.levels.len())]
            .iter()
            .all(|lvl| g.apply(lvl.base_point) == lvl.base_point));
        if level == self.levels.len() {
            let base_point = (1..=self.degree)
                .find(|&x| g.apply(x) != x)
                .expect("nontrivial permutation moves a point");
            self.levels.push(ChainLevel {
                base_point,
                placed: Vec::new(),
                transversal: Vec::new(),
                orbit: Vec::new(),
            });
        }
        self.levels[level].placed.push(g);
    }

    fn rebuild_orbits(&mut self) {
        for i in 0..self.levels.len() {
            let base = self.levels[i].base_point;
            let acting: Vec<Perm> = self.levels[i..]
                .iter()
                .flat_map(|lvl| lvl.placed.iter().cloned())
                .collect();
            let mut transversal: Vec<Option<Perm>> = vec![None; self.degree];
            transversal[base - 1] = Some(Perm::identity(self.degree));
            let mut orbit = vec![base];
            let mut head = 0;
            while head < orbit.len() {
                let x = orbit[head];
                head += 1;
                let ux = transversal[x - 1].clone().expect("orbit point has rep");
                for g in &acting {
                    let y = g.apply(x);
                    if transversal[y - 1].is_none() {
                        transversal[y - 1] = Some(g.compose(&ux).expect("equal degrees"));
                        orbit.push(y);
                    }
                }
            }
            self.levels[i].transversal = transversal;
            self.levels[i].orbit = orbit;
        }
    }

    /// First Schreier generator that fails to sift to the identity, as
    /// (failure level, residue). `None` means the chain is complete.
    fn verification_failure(&self) -> Option<(usize, Perm)> {
        for i in 0..self.levels.len() {
            let lvl = &self.levels[i];
            let acting: Vec<&Perm> = self.levels[i..]
                .iter()
                .flat_map(|l| l.placed.iter())
                .collect();
            for &x in &lvl.orbit {
                let ux = lvl.transversal[x - 1].as_ref().expect("rep");
                for g in &acting {
                    let y = g.apply(x);
                    let uy = lvl.transversal[y - 1].as_ref().expect("rep");
                    let schreier = uy
                        .inverse()
                        .compose(&g.compose(ux).expect("deg"))
                        .expect("deg");
                    if schreier.is_identity() {
                        continue;
                    }
                    if let Some((j, residue)) = self.sift_from(i + 1, schreier) {
                        return Some((j, residue));
                    }
                }
            }
        }
        None
    }

    /// Sift through levels `start..`; `None` means reduced to the identity.
    fn sift_from(&self, start: usize, mut g: Perm) -> Option<(usize, Perm)> {
        for (i, lvl) in self.levels.iter().enumerate().skip(start) {
            let x = g.apply(lvl.base_point);
            match lvl.transversal.get(x - 1).and_then(|t| t.as_ref()) {
                Some(u) => {
                    g = u.inverse().compose(&g).expect("equal degrees");
                }
                None => return Some((i, g)),
            }
        }
        if g.is_identity() {
            None
        } else {
            Some((self.levels.len(), g))
        }
    }

    pub fn order(&self) -> u128 {
        self.levels
            .iter()
            .map(|lvl| lvl.orbit.len() as u128)
            .product()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.sift_from(0, g.clone()).is_none()
    }
}
