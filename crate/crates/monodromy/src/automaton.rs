//! Finite-state tree automorphisms as wreath recursions: a root permutation
//! of the d letters plus one successor word per source letter. States may
//! reference each other cyclically; unrolling expands depth-first to a
//! permutation of any level.
//!
//! Successor entries are words over the states, applied left to right, with
//! optional inverses, so an entry can be a formal product without minting a
//! new state. The action convention is `s(i·w) = ρ(i)·(entry_i(w))` where ρ
//! is the root permutation of `s`.
//!
//! Text format, one state per line, mirroring the recursion displays:
//!
//! ```text
//! alpha = <id, alpha, id, id, id, delta> (1 2)(5 6)
//! gamma = <id, beta, id, id, id, id>
//! ```

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use rand::Rng;

use crate::perm::Perm;
use crate::tree::TreeShape;

pub type StateId = usize;

/// One letter of a successor word: a state, possibly inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedState {
    pub id: StateId,
    pub inverse: bool,
}

impl SignedState {
    pub fn plain(id: StateId) -> Self {
        SignedState { id, inverse: false }
    }
}

/// A successor word, applied left to right.
pub type StateWord = Vec<SignedState>;

#[derive(Debug, Clone)]
pub struct State {
    pub name: String,
    pub root: Perm,
    /// `children[i - 1]` is the successor word for source letter `i`.
    pub children: Vec<StateWord>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("state {0:?} defined twice")]
    DuplicateState(String),
    #[error("root permutation degree {0} does not match automaton degree {1}")]
    RootDegree(usize, usize),
    #[error("state {0:?} has {1} successors, expected {2}")]
    ChildCount(String, usize, usize),
    #[error("cannot parse automaton line {0:?}: {1}")]
    Parse(String, String),
}

/// The identity state is always present with id 0 and name `id`.
pub const IDENTITY: StateId = 0;

#[derive(Debug, Clone)]
pub struct Automaton {
    degree: usize,
    states: Vec<State>,
}

impl Automaton {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 2);
        Automaton {
            degree,
            states: vec![State {
                name: "id".to_string(),
                root: Perm::identity(degree),
                children: vec![Vec::new(); degree],
            }],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id]
    }

    /// Generator states: everything except the identity.
    pub fn generator_ids(&self) -> Vec<StateId> {
        (1..self.states.len()).collect()
    }

    pub fn add_state(
        &mut self,
        name: &str,
        root: Perm,
        children: Vec<StateWord>,
    ) -> Result<StateId, AutomatonError> {
        if self.state_id(name).is_some() {
            return Err(AutomatonError::DuplicateState(name.to_string()));
        }
        if root.degree() != self.degree {
            return Err(AutomatonError::RootDegree(root.degree(), self.degree));
        }
        if children.len() != self.degree {
            return Err(AutomatonError::ChildCount(
                name.to_string(),
                children.len(),
                self.degree,
            ));
        }
        self.states.push(State {
            name: name.to_string(),
            root,
            children,
        });
        Ok(self.states.len() - 1)
    }

    /// Replace the root permutation and successors of an existing state.
    pub fn redefine(
        &mut self,
        id: StateId,
        root: Perm,
        children: Vec<StateWord>,
    ) -> Result<(), AutomatonError> {
        if root.degree() != self.degree {
            return Err(AutomatonError::RootDegree(root.degree(), self.degree));
        }
        if children.len() != self.degree {
            return Err(AutomatonError::ChildCount(
                self.states[id].name.clone(),
                children.len(),
                self.degree,
            ));
        }
        self.states[id].root = root;
        self.states[id].children = children;
        Ok(())
    }

    /// Unroll every state to a permutation of the level-k vertices.
    pub fn unroll_all(&self, level: usize) -> Vec<Perm> {
        let mut current: Vec<Perm> = self.states.iter().map(|_| Perm::identity(1)).collect();
        for k in 1..=level {
            let block = self.degree.pow((k - 1) as u32);
            let mut next = Vec::with_capacity(self.states.len());
            for state in &self.states {
                let mut images = vec![0usize; self.degree * block];
                for letter in 1..=self.degree {
                    let child = eval_word(&state.children[letter - 1], &current);
                    let target = state.root.apply(letter);
                    for w in 1..=block {
                        images[(letter - 1) * block + w - 1] =
                            (target - 1) * block + child.apply(w);
                    }
                }
                next.push(Perm::from_images(images).expect("unrolled action is bijective"));
            }
            current = next;
        }
        current
    }

    pub fn unroll(&self, id: StateId, level: usize) -> Perm {
        self.unroll_all(level)[id].clone()
    }

    pub fn unroll_word(&self, word: &[SignedState], level: usize) -> Perm {
        eval_word(word, &self.unroll_all(level))
    }

    pub fn shape(&self, level: usize) -> TreeShape {
        TreeShape::new(self.degree, level)
    }

    /// The odometer: root cycle `(1 2 … d)` with the state itself as the
    /// successor of letter 1. Its level-n unrolling is a full d^n-cycle.
    pub fn adding_machine(degree: usize) -> (Automaton, StateId) {
        let mut a = Automaton::new(degree);
        let cycle: Vec<usize> = (1..=degree).collect();
        let root = Perm::from_cycles(degree, &[cycle]).expect("valid cycle");
        let mut children = vec![Vec::new(); degree];
        let id = a.states.len();
        children[0] = vec![SignedState::plain(id)];
        a.add_state("a", root, children).expect("fresh state");
        (a, id)
    }

    /// A uniformly random depth-n automorphism: an explicit portrait with an
    /// independent uniform permutation at every internal vertex.
    pub fn random_automorphism<R: Rng>(
        shape: &TreeShape,
        rng: &mut R,
        name_prefix: &str,
    ) -> (Automaton, StateId) {
        let d = shape.degree;
        let mut a = Automaton::new(d);
        // Internal vertices are words of length < n; allocate ids level by
        // level so children of vertex v are the states of v·i.
        let mut ids_by_level: Vec<Vec<StateId>> = Vec::new();
        let mut counter = 0usize;
        for depth in 0..shape.height {
            let count = d.pow(depth as u32);
            let mut ids = Vec::with_capacity(count);
            for _ in 0..count {
                counter += 1;
                let root = random_perm(rng, d);
                let id = a
                    .add_state(
                        &format!("{name_prefix}{counter}"),
                        root,
                        vec![Vec::new(); d],
                    )
                    .expect("fresh state");
                ids.push(id);
            }
            ids_by_level.push(ids);
        }
        for depth in 0..shape.height.saturating_sub(1) {
            for (v, &id) in ids_by_level[depth].iter().enumerate() {
                for i in 0..d {
                    let child = ids_by_level[depth + 1][v * d + i];
                    a.states[id].children[i] = vec![SignedState::plain(child)];
                }
            }
        }
        (a, ids_by_level[0][0])
    }

    /// Render one state line in the text format.
    pub fn state_line(&self, id: StateId) -> String {
        let state = &self.states[id];
        let entries: Vec<String> = state
            .children
            .iter()
            .map(|word| self.word_string(word))
            .collect();
        let mut line = format!("{} = <{}>", state.name, entries.join(", "));
        if !state.root.is_identity() {
            line.push(' ');
            line.push_str(&state.root.to_string());
        }
        line
    }

    pub fn word_string(&self, word: &[SignedState]) -> String {
        if word.is_empty() {
            return "id".to_string();
        }
        word.iter()
            .map(|s| {
                let name = &self.states[s.id].name;
                if s.inverse {
                    format!("{name}^-1")
                } else {
                    name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Parse the text format: one non-identity state per line.
    pub fn parse(degree: usize, text: &str) -> Result<Automaton, AutomatonError> {
        let mut a = Automaton::new(degree);
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        // First pass: declare state names so cyclic references resolve.
        let mut declared: BTreeMap<String, StateId> = BTreeMap::new();
        declared.insert("id".to_string(), IDENTITY);
        for line in &lines {
            let name = line
                .split('=')
                .next()
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| {
                    AutomatonError::Parse(line.to_string(), "missing state name".into())
                })?;
            let id = a.add_state(name, Perm::identity(degree), vec![Vec::new(); degree])?;
            declared.insert(name.to_string(), id);
        }
        // Second pass: fill in roots and successor words.
        for line in &lines {
            let (name, rest) = line.split_once('=').ok_or_else(|| {
                AutomatonError::Parse(line.to_string(), "missing '='".into())
            })?;
            let id = declared[name.trim()];
            let rest = rest.trim();
            if !rest.starts_with('<') {
                return Err(AutomatonError::Parse(
                    line.to_string(),
                    "missing '<' tuple".into(),
                ));
            }
            let close = rest.find('>').ok_or_else(|| {
                AutomatonError::Parse(line.to_string(), "missing '>'".into())
            })?;
            let tuple = &rest[1..close];
            let perm_text = rest[close + 1..].trim();
            let entries: Vec<&str> = tuple.split(',').map(str::trim).collect();
            if entries.len() != degree {
                return Err(AutomatonError::ChildCount(
                    name.trim().to_string(),
                    entries.len(),
                    degree,
                ));
            }
            let mut children = Vec::with_capacity(degree);
            for entry in entries {
                children.push(parse_word(entry, &declared).map_err(|e| {
                    AutomatonError::Parse(line.to_string(), e)
                })?);
            }
            let root = if perm_text.is_empty() {
                Perm::identity(degree)
            } else {
                Perm::parse(degree, perm_text).map_err(|e| {
                    AutomatonError::Parse(line.to_string(), e.to_string())
                })?
            };
            a.states[id].root = root;
            a.states[id].children = children;
        }
        Ok(a)
    }
}

impl fmt::Display for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for id in 1..self.states.len() {
            writeln!(f, "{}", self.state_line(id))?;
        }
        Ok(())
    }
}

fn parse_word(
    entry: &str,
    declared: &BTreeMap<String, StateId>,
) -> Result<StateWord, String> {
    if entry == "id" || entry.is_empty() {
        return Ok(Vec::new());
    }
    let mut word = Vec::new();
    for factor in entry.split('*').map(str::trim) {
        let (name, inverse) = match factor.strip_suffix("^-1") {
            Some(base) => (base.trim(), true),
            None => (factor, false),
        };
        let id = *declared
            .get(name)
            .ok_or_else(|| format!("unknown state {name:?}"))?;
        word.push(SignedState { id, inverse });
    }
    Ok(word)
}

/// Evaluate a successor word against already-unrolled state permutations;
/// the word acts left to right, so the composite is `last ∘ … ∘ first`.
fn eval_word(word: &[SignedState], unrolled: &[Perm]) -> Perm {
    let degree = unrolled[IDENTITY].degree();
    let mut acc = Perm::identity(degree);
    for s in word {
        let factor = if s.inverse {
            unrolled[s.id].inverse()
        } else {
            unrolled[s.id].clone()
        };
        acc = factor.compose(&acc).expect("equal degrees");
    }
    acc
}

fn random_perm<R: Rng>(rng: &mut R, degree: usize) -> Perm {
    // Fisher–Yates on the image table.
    let mut images: Vec<usize> = (1..=degree).collect();
    for i in (1..degree).rev() {
        let j = rng.gen_range(0..=i);
        images.swap(i, j);
    }
    Perm::from_images(images).expect("shuffle is a bijection")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The four displayed degree-6 recursions used across the test suite.
    pub fn deg6_wreath_fixture() -> Automaton {
        Automaton::parse(
            6,
            "alpha = <id, alpha, id, id, id, delta> (1 2)(5 6)\n\
             beta = <id, id, id, gamma, id, id> (3 4)\n\
             gamma = <id, beta, id, id, id, id>\n\
             delta = <id, id, id, id, id, id> (2 3)(4 5)",
        )
        .unwrap()
    }

    #[test]
    fn fixture_level_one_roots() {
        let a = deg6_wreath_fixture();
        let delta = a.state_id("delta").unwrap();
        let gamma = a.state_id("gamma").unwrap();
        assert_eq!(a.unroll(delta, 1), Perm::parse(6, "(2 3)(4 5)").unwrap());
        assert!(a.unroll(gamma, 1).is_identity());
    }

    #[test]
    fn alpha_level_two_maps_22_to_11() {
        let a = deg6_wreath_fixture();
        let alpha = a.state_id("alpha").unwrap();
        let shape = TreeShape::new(6, 2);
        let perm = a.unroll(alpha, 2);
        let from = shape.index_of(&[2, 2]).unwrap();
        let to = shape.index_of(&[1, 1]).unwrap();
        assert_eq!(perm.apply(from), to);
    }

    #[test]
    fn unroll_is_homomorphism_on_fixture() {
        let a = deg6_wreath_fixture();
        let ids = a.generator_ids();
        for level in 1..=3 {
            let unrolled = a.unroll_all(level);
            for &x in &ids {
                for &y in &ids {
                    let word = vec![SignedState::plain(x), SignedState::plain(y)];
                    // Word [x, y] acts x first: unroll(y) ∘ unroll(x).
                    let via_word = a.unroll_word(&word, level);
                    let direct = unrolled[y].compose(&unrolled[x]).unwrap();
                    assert_eq!(via_word, direct);
                }
            }
        }
    }

    #[test]
    fn adding_machine_unrolls_to_full_cycle() {
        for d in [2usize, 3, 6] {
            let (a, s) = Automaton::adding_machine(d);
            for level in 1..=3 {
                if d.pow(level as u32) > 300 {
                    continue;
                }
                assert!(a.unroll(s, level).is_full_cycle());
            }
        }
    }

    #[test]
    fn ninth_power_of_36_cycle_has_nine_4_cycles() {
        let (a, s) = Automaton::adding_machine(6);
        let sigma = a.unroll(s, 2);
        assert!(sigma.is_full_cycle());
        let ninth = sigma.pow(9);
        assert_eq!(ninth.order(), 4);
        let cycles = ninth.cycles();
        assert_eq!(cycles.len(), 9);
        assert!(cycles.iter().all(|c| c.len() == 4));
    }

    #[test]
    fn squared_binary_odometer_is_not_full_cycle() {
        let (a, s) = Automaton::adding_machine(2);
        let sigma = a.unroll(s, 2);
        let squared = sigma.compose(&sigma).unwrap();
        assert!(!squared.is_full_cycle());
        assert_eq!(squared.cycles().len(), 2);
        assert!(!Perm::identity(4).is_full_cycle());
    }

    #[test]
    fn parse_display_roundtrip() {
        let a = deg6_wreath_fixture();
        let shown = a.to_string();
        let reparsed = Automaton::parse(6, &shown).unwrap();
        for level in 1..=2 {
            assert_eq!(reparsed.unroll_all(level), a.unroll_all(level));
        }
        assert_eq!(shown, reparsed.to_string());
    }

    #[test]
    fn parse_inverse_entries() {
        let a = Automaton::parse(2, "a = <a^-1*a, id> (1 2)").unwrap();
        let s = a.state_id("a").unwrap();
        // a⁻¹·a cancels, so this is just the root swap repeated at every level.
        let p2 = a.unroll(s, 2);
        assert_eq!(p2, Perm::parse(4, "(1 3)(2 4)").unwrap());
    }

    #[test]
    fn random_automorphism_is_seed_deterministic_and_tree_preserving() {
        let shape = TreeShape::new(3, 3);
        let (a1, s1) = Automaton::random_automorphism(&shape, &mut ChaCha8Rng::seed_from_u64(0), "r");
        let (a2, s2) = Automaton::random_automorphism(&shape, &mut ChaCha8Rng::seed_from_u64(0), "r");
        assert_eq!(a1.unroll(s1, 3), a2.unroll(s2, 3));

        let perm = a1.unroll(s1, 3);
        assert!(crate::tree::is_tree_automorphism(&shape, &perm));
        // Image of a branch is a branch of equal height.
        for prefix in [vec![1], vec![2, 3]] {
            let branch = shape.branch_indices(&prefix);
            let image: std::collections::BTreeSet<usize> =
                branch.iter().map(|&i| perm.apply(i)).collect();
            let image_words: Vec<_> = image.iter().map(|&i| shape.word_of(i)).collect();
            let lcp = image_words[0]
                .iter()
                .zip(image_words.last().unwrap())
                .take_while(|(a, b)| a == b)
                .count();
            assert!(lcp >= prefix.len());
            assert_eq!(image.len(), branch.len());
        }
    }

    #[test]
    fn composing_random_automorphisms_matches_composed_unrollings() {
        let shape = TreeShape::new(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (b1, r1) = Automaton::random_automorphism(&shape, &mut rng, "x");
        let (b2, r2) = Automaton::random_automorphism(&shape, &mut rng, "y");
        let p1 = b1.unroll(r1, 3);
        let p2 = b2.unroll(r2, 3);
        let composed = p2.compose(&p1).unwrap();
        assert!(crate::tree::is_tree_automorphism(&shape, &composed));
        for x in 1..=8 {
            assert_eq!(composed.apply(x), p2.apply(p1.apply(x)));
        }
    }
}
