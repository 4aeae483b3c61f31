//! Abstract conservative cycle systems: the generator cycles of a polynomial
//! whose critical points are all fixed, the tree-shaped intersection graph
//! machinery, and the constructive double-transitivity witness.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use thiserror::Error;

use crate::group::GeneratedGroup;
use crate::perm::Perm;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SystemError {
    #[error("cycle {0} has length {1}, need at least 2")]
    ShortCycle(usize, usize),
    #[error("point {0} out of range 1..={1}")]
    PointOutOfRange(usize, usize),
    #[error("point {0} repeated within a cycle")]
    RepeatedPoint(usize),
    #[error("ramification sum {0} differs from degree − 1 = {1}")]
    RamificationSum(usize, usize),
    #[error("union graph is disconnected")]
    Disconnected,
    #[error("cycles {0} and {1} share more than one point")]
    SharedPoints(usize, usize),
    #[error("witness requires at least two cycles")]
    SingleCycle,
    #[error("expected one cycle per line, found {0}")]
    MultipleCyclesPerLine(usize),
    #[error("witness endpoints must differ from the fixed point")]
    BadTriple,
    #[error("internal correction failed to fix the requested point")]
    CorrectionFailed,
}

/// Cycles C_1 … C_k on `{1..d}`, each a single cycle of length ≥ 2, with
/// ramification total d − 1 and a tree-shaped intersection pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleSystem {
    pub degree: usize,
    pub cycles: Vec<Vec<usize>>,
}

/// Edge lists for the union multigraph and its tree after deleting one edge
/// per cycle. Edges carry the index of the cycle they came from.
#[derive(Debug, Clone)]
pub struct GammaGraphs {
    pub gamma_edges: Vec<(usize, usize, usize)>,
    pub gamma_prime_edges: Vec<(usize, usize, usize)>,
    /// Plane regions of the tree by the Euler count, always 1.
    pub face_count: usize,
}

impl CycleSystem {
    pub fn new(degree: usize, cycles: Vec<Vec<usize>>) -> Result<Self, SystemError> {
        let system = CycleSystem { degree, cycles };
        system.validate()?;
        Ok(system)
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        let d = self.degree;
        let mut ram = 0usize;
        for (i, cycle) in self.cycles.iter().enumerate() {
            if cycle.len() < 2 {
                return Err(SystemError::ShortCycle(i, cycle.len()));
            }
            let mut seen = BTreeSet::new();
            for &x in cycle {
                if x == 0 || x > d {
                    return Err(SystemError::PointOutOfRange(x, d));
                }
                if !seen.insert(x) {
                    return Err(SystemError::RepeatedPoint(x));
                }
            }
            ram += cycle.len() - 1;
        }
        if ram != d - 1 {
            return Err(SystemError::RamificationSum(ram, d - 1));
        }
        self.gamma_graphs().map(|_| ())
    }

    pub fn cycle_perm(&self, index: usize) -> Perm {
        Perm::from_cycles(self.degree, &[self.cycles[index].clone()])
            .expect("validated cycle")
    }

    pub fn generators(&self) -> Vec<Perm> {
        (0..self.cycles.len()).map(|i| self.cycle_perm(i)).collect()
    }

    /// Build the union multigraph and the tree left after deleting, from
    /// each cycle, the edge leaving its maximal point.
    pub fn gamma_graphs(&self) -> Result<GammaGraphs, SystemError> {
        let d = self.degree;
        let mut gamma = Vec::new();
        let mut gamma_prime = Vec::new();
        for (ci, cycle) in self.cycles.iter().enumerate() {
            let k = cycle.len();
            let max_pos = (0..k).max_by_key(|&j| cycle[j]).expect("nonempty");
            for j in 0..k {
                let edge = (cycle[j], cycle[(j + 1) % k], ci);
                gamma.push(edge);
                if j != max_pos {
                    gamma_prime.push(edge);
                }
            }
        }
        // Connectivity of the tree (and hence of the union graph).
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); d + 1];
        for &(u, v, _) in &gamma_prime {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; d + 1];
        let mut queue = VecDeque::from([1usize]);
        seen[1] = true;
        let mut count = 1usize;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        if count != d {
            return Err(SystemError::Disconnected);
        }
        debug_assert_eq!(gamma_prime.len(), d - 1);
        // Connected with d − 1 edges: by the Euler count the plane graph
        // encloses a single region, so it is a tree. That forces any two
        // cycles to share at most one point; check it explicitly.
        for i in 0..self.cycles.len() {
            let si: BTreeSet<usize> = self.cycles[i].iter().cloned().collect();
            for j in (i + 1)..self.cycles.len() {
                let shared = self.cycles[j].iter().filter(|x| si.contains(x)).count();
                if shared > 1 {
                    return Err(SystemError::SharedPoints(i, j));
                }
            }
        }
        Ok(GammaGraphs {
            gamma_edges: gamma,
            gamma_prime_edges: gamma_prime,
            face_count: 1,
        })
    }

    /// Evaluate a word of (cycle index, exponent) factors, applied in order.
    pub fn evaluate_word(&self, word: &[(usize, i64)]) -> Perm {
        let mut acc = Perm::identity(self.degree);
        for &(ci, e) in word {
            acc = self.cycle_perm(ci).pow(e).compose(&acc).expect("deg");
        }
        acc
    }

    fn support(&self, index: usize) -> BTreeSet<usize> {
        self.cycles[index].iter().cloned().collect()
    }

    fn position_in_cycle(&self, index: usize, point: usize) -> usize {
        self.cycles[index]
            .iter()
            .position(|&x| x == point)
            .expect("point in cycle support")
    }

    /// Exponent e with C_index^e(from) = to, chosen with minimal |e|.
    fn exponent(&self, index: usize, from: usize, to: usize) -> i64 {
        let k = self.cycles[index].len() as i64;
        let pf = self.position_in_cycle(index, from) as i64;
        let pt = self.position_in_cycle(index, to) as i64;
        let mut e = (pt - pf).rem_euclid(k);
        if 2 * e > k {
            e -= k;
        }
        e
    }

    /// A word in the generators mapping `a` to `c` while fixing `b`, built
    /// from the tree path with the standard corrections when the path
    /// touches `b`. The returned word has at most 3·(cycle count) + 2
    /// factors.
    pub fn witness(
        &self,
        a: usize,
        b: usize,
        c: usize,
    ) -> Result<Vec<(usize, i64)>, SystemError> {
        if a == b || c == b {
            return Err(SystemError::BadTriple);
        }
        if self.cycles.len() < 2 {
            return Err(SystemError::SingleCycle);
        }
        if a == c {
            return Ok(Vec::new());
        }
        let runs = self.tree_path_runs(a, c)?;
        let word = self.correct_for_fixed_point(&runs, a, c, b)?;
        let g = self.evaluate_word(&word);
        if g.apply(a) != c || g.apply(b) != b {
            return Err(SystemError::CorrectionFailed);
        }
        debug_assert!(word.len() <= 3 * self.cycles.len() + 2);
        Ok(word)
    }

    /// The unique tree path from `a` to `c`, grouped into maximal runs
    /// through a single cycle: (cycle index, exponent).
    fn tree_path_runs(&self, a: usize, c: usize) -> Result<Vec<(usize, i64)>, SystemError> {
        let graphs = self.gamma_graphs()?;
        let d = self.degree;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); d + 1];
        for &(u, v, ci) in &graphs.gamma_prime_edges {
            adj[u].push((v, ci));
            adj[v].push((u, ci));
        }
        // BFS with parent pointers; the tree path is unique.
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; d + 1];
        let mut seen = vec![false; d + 1];
        seen[a] = true;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            if u == c {
                break;
            }
            for &(v, ci) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, ci));
                    queue.push_back(v);
                }
            }
        }
        let mut vertices = vec![c];
        let mut edge_cycles = Vec::new();
        let mut cursor = c;
        while cursor != a {
            let (prev, ci) = parent[cursor].expect("path exists in a connected tree");
            vertices.push(prev);
            edge_cycles.push(ci);
            cursor = prev;
        }
        vertices.reverse();
        edge_cycles.reverse();
        // Group consecutive edges in the same cycle into runs.
        let mut runs: Vec<(usize, usize, usize)> = Vec::new(); // (cycle, entry, exit)
        for (step, &ci) in edge_cycles.iter().enumerate() {
            match runs.last_mut() {
                Some((cycle, _, exit)) if *cycle == ci => *exit = vertices[step + 1],
                _ => runs.push((ci, vertices[step], vertices[step + 1])),
            }
        }
        // Each cycle appears in at most one run of a tree path.
        let distinct: BTreeSet<usize> = runs.iter().map(|r| r.0).collect();
        debug_assert_eq!(distinct.len(), runs.len());
        Ok(runs
            .into_iter()
            .map(|(ci, entry, exit)| (ci, self.exponent(ci, entry, exit)))
            .collect())
    }

    /// Apply the proof's corrections so the word fixes `b`. `runs` is in
    /// temporal order (first factor applied first).
    fn correct_for_fixed_point(
        &self,
        runs: &[(usize, i64)],
        a: usize,
        c: usize,
        b: usize,
    ) -> Result<Vec<(usize, i64)>, SystemError> {
        let touched: Vec<bool> = runs
            .iter()
            .map(|&(ci, _)| self.support(ci).contains(&b))
            .collect();
        let Some(k) = touched.iter().rposition(|&t| t) else {
            return Ok(runs.to_vec());
        };
        let (ck, ek) = runs[k];
        if runs.len() == 1 {
            // Single-cycle path: conjugate around a neighboring cycle.
            let supp = self.support(ck);
            let (other, alpha) = (0..self.cycles.len())
                .filter(|&i| i != ck)
                .find_map(|i| {
                    self.support(i)
                        .intersection(&supp)
                        .next()
                        .map(|&alpha| (i, alpha))
                })
                .ok_or(SystemError::Disconnected)?;
            let j = self.exponent_to_point(ck, b, alpha);
            return Ok(vec![
                (ck, j),
                (other, 1),
                (ck, ek),
                (other, -1),
                (ck, -j),
            ]);
        }
        let mut word: Vec<(usize, i64)> = Vec::new();
        if k >= 1 && touched[k - 1] {
            // b is the unique point shared by runs k−1 and k: insert the
            // inverse of run k−1 after run k.
            word.extend_from_slice(&runs[..=k]);
            word.push((runs[k - 1].0, -runs[k - 1].1));
            word.extend_from_slice(&runs[k + 1..]);
        } else if k >= 1 {
            // b only in run k: conjugate run k−1 by run k.
            word.extend_from_slice(&runs[..k - 1]);
            word.push((ck, -ek));
            word.push(runs[k - 1]);
            word.push((ck, ek));
            word.extend_from_slice(&runs[k + 1..]);
        } else {
            // k = 0 with at least two runs: conjugate run 1 by run 0.
            word.push(runs[0]);
            word.push(runs[1]);
            word.push((runs[0].0, -runs[0].1));
            word.extend_from_slice(&runs[2..]);
        }
        let _ = (a, c);
        Ok(word)
    }

    /// Exponent j with C_index^j(from) = to (not normalized to minimal size).
    fn exponent_to_point(&self, index: usize, from: usize, to: usize) -> i64 {
        let k = self.cycles[index].len() as i64;
        let pf = self.position_in_cycle(index, from) as i64;
        let pt = self.position_in_cycle(index, to) as i64;
        (pt - pf).rem_euclid(k)
    }

    /// The generated group acts doubly transitively for every valid system
    /// with at least two cycles.
    pub fn check_doubly_transitive(&self) -> Result<bool, SystemError> {
        if self.cycles.len() < 2 {
            return Err(SystemError::SingleCycle);
        }
        let group = GeneratedGroup::new(self.degree, self.generators()).expect("deg");
        Ok(group.is_doubly_transitive())
    }

    /// Text format: one cycle per line in cycle notation.
    pub fn parse(degree: usize, text: &str) -> Result<Self, SystemError> {
        let mut cycles = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let perm = Perm::parse(degree, line)
                .map_err(|_| SystemError::PointOutOfRange(0, degree))?;
            let mut parsed = perm.cycles();
            if parsed.len() != 1 {
                return Err(SystemError::MultipleCyclesPerLine(parsed.len()));
            }
            cycles.push(parsed.remove(0));
        }
        CycleSystem::new(degree, cycles)
    }
}

impl std::fmt::Display for CycleSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.cycles.len() {
            writeln!(f, "{}", self.cycle_perm(i))?;
        }
        Ok(())
    }
}

/// Random valid cycle system: sample a composition of d − 1 into cycle
/// weights, attach each new cycle to the growing tree at exactly one shared
/// point, then relabel uniformly.
pub fn random_system<R: Rng>(degree: usize, rng: &mut R) -> CycleSystem {
    assert!(degree >= 3, "need at least two cycles, so degree ≥ 3");
    let max_cycles = degree - 1;
    let n_cycles = rng.gen_range(2..=max_cycles.min(degree - 1));
    // Composition of degree − 1 into n_cycles parts ≥ 1.
    let mut cuts = BTreeSet::new();
    while cuts.len() < n_cycles - 1 {
        cuts.insert(rng.gen_range(1..degree - 1));
    }
    let mut lengths = Vec::new();
    let mut prev = 0usize;
    for &cut in cuts.iter().chain(std::iter::once(&(degree - 1))) {
        lengths.push(cut - prev + 1); // weight + 1 = cycle length ≥ 2
        prev = cut;
    }
    // Attach cycles over a pool of fresh labels.
    let mut next_label = 1usize;
    let fresh = |n: usize, next_label: &mut usize| -> Vec<usize> {
        let out: Vec<usize> = (*next_label..*next_label + n).collect();
        *next_label += n;
        out
    };
    let mut used: Vec<usize> = Vec::new();
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for (i, &len) in lengths.iter().enumerate() {
        let mut cycle = if i == 0 {
            fresh(len, &mut next_label)
        } else {
            let anchor = used[rng.gen_range(0..used.len())];
            let mut cycle = vec![anchor];
            cycle.extend(fresh(len - 1, &mut next_label));
            cycle
        };
        // Randomize the cyclic order of the non-anchor part.
        for idx in (2..cycle.len()).rev() {
            let j = rng.gen_range(1..=idx);
            cycle.swap(idx, j);
        }
        let new_points: Vec<usize> = cycle
            .iter()
            .filter(|&&x| !used.contains(&x))
            .cloned()
            .collect();
        used.extend(new_points);
        cycles.push(cycle);
    }
    debug_assert_eq!(next_label - 1, degree);
    // Uniform relabeling.
    let mut relabel: Vec<usize> = (1..=degree).collect();
    for i in (1..degree).rev() {
        let j = rng.gen_range(0..=i);
        relabel.swap(i, j);
    }
    for cycle in &mut cycles {
        for x in cycle.iter_mut() {
            *x = relabel[*x - 1];
        }
    }
    CycleSystem::new(degree, cycles).expect("construction yields a valid system")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cubic_system_graphs() {
        let s = CycleSystem::new(3, vec![vec![1, 2], vec![2, 3]]).unwrap();
        let g = s.gamma_graphs().unwrap();
        assert_eq!(g.gamma_edges.len(), 4);
        assert_eq!(g.gamma_prime_edges.len(), 2);
        assert_eq!(g.face_count, 1);
    }

    #[test]
    fn single_long_cycle_graphs() {
        let s = CycleSystem::new(5, vec![vec![1, 2, 3, 4, 5]]).unwrap();
        let g = s.gamma_graphs().unwrap();
        assert_eq!(g.gamma_prime_edges.len(), 4);
    }

    #[test]
    fn mixed_system_graphs() {
        let s = CycleSystem::new(4, vec![vec![1, 2, 3], vec![3, 4]]).unwrap();
        let g = s.gamma_graphs().unwrap();
        assert_eq!(g.gamma_prime_edges.len(), 3);
    }

    #[test]
    fn invalid_systems_rejected() {
        // Ramification sum off by one.
        assert!(CycleSystem::new(4, vec![vec![1, 2], vec![3, 4]]).is_err());
        // Disconnected: two 2-cycles plus isolated point.
        assert!(CycleSystem::new(5, vec![vec![1, 2], vec![3, 4], vec![4, 5]]).is_err());
        // Two cycles sharing two points.
        assert!(CycleSystem::new(5, vec![vec![1, 2, 3, 4], vec![1, 2]]).is_err());
    }

    #[test]
    fn witness_on_cubic() {
        let s = CycleSystem::new(3, vec![vec![1, 2], vec![2, 3]]).unwrap();
        let word = s.witness(1, 2, 3).unwrap();
        let g = s.evaluate_word(&word);
        assert_eq!(g.apply(1), 3);
        assert_eq!(g.apply(2), 2);
    }

    #[test]
    fn witness_with_equal_endpoints() {
        let s = CycleSystem::new(3, vec![vec![1, 2], vec![2, 3]]).unwrap();
        let word = s.witness(1, 2, 1).unwrap();
        let g = s.evaluate_word(&word);
        assert_eq!(g.apply(1), 1);
        assert_eq!(g.apply(2), 2);
    }

    #[test]
    fn witness_around_shared_point() {
        let s = CycleSystem::new(5, vec![vec![1, 2, 3], vec![3, 4, 5]]).unwrap();
        let word = s.witness(1, 3, 5).unwrap();
        let g = s.evaluate_word(&word);
        assert_eq!(g.apply(1), 5);
        assert_eq!(g.apply(3), 3);
    }

    #[test]
    fn witness_single_cycle_rejected() {
        let s = CycleSystem::new(4, vec![vec![1, 2, 3, 4]]).unwrap();
        assert_eq!(s.witness(1, 2, 3), Err(SystemError::SingleCycle));
        assert_eq!(s.check_doubly_transitive(), Err(SystemError::SingleCycle));
    }

    #[test]
    fn doubly_transitive_examples() {
        let cubic = CycleSystem::new(3, vec![vec![1, 2], vec![2, 3]]).unwrap();
        assert!(cubic.check_doubly_transitive().unwrap());
        let s = CycleSystem::new(5, vec![vec![1, 2, 3, 4], vec![4, 5]]).unwrap();
        assert!(s.check_doubly_transitive().unwrap());
    }

    #[test]
    fn random_systems_validate_and_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let d = rng.gen_range(3..=9usize);
            let s = random_system(d, &mut rng);
            s.validate().unwrap();
            assert!(s.check_doubly_transitive().unwrap());
            for a in 1..=d {
                for b in 1..=d {
                    for c in 1..=d {
                        if a == b || c == b {
                            continue;
                        }
                        let word = s.witness(a, b, c).unwrap();
                        let g = s.evaluate_word(&word);
                        assert_eq!(g.apply(a), c, "system {s} word {word:?}");
                        assert_eq!(g.apply(b), b, "system {s} word {word:?}");
                        assert!(word.len() <= 3 * s.cycles.len() + 2);
                    }
                }
            }
        }
    }

    #[test]
    fn parse_display_roundtrip() {
        let s = CycleSystem::new(5, vec![vec![1, 2, 3], vec![3, 4, 5]]).unwrap();
        let text = s.to_string();
        let reparsed = CycleSystem::parse(5, &text).unwrap();
        assert_eq!(reparsed.generators(), s.generators());
    }
}
