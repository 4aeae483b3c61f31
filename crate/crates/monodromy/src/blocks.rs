//! Block systems of transitive permutation groups: minimal blocks by
//! partition refinement, block lattices, primitivity, and executable
//! verifiers for the two structure theorems on full-cycle subgroups of
//! tree automorphisms.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::automaton::Automaton;
use crate::group::GeneratedGroup;
use crate::perm::Perm;
use crate::tree::{classify_block_shape, is_tree_automorphism, root_restriction, BlockShape, TreeShape};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlockError {
    #[error("group is not transitive; minimal blocks are ill-behaved across orbits")]
    NotTransitive,
    #[error("empty seed set")]
    EmptySeed,
    #[error("degree {0} exceeds the lattice cap {1}")]
    CapExceeded(usize, usize),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("seed lies inside a single major branch")]
    SeedInOneBranch,
    #[error("point {0} out of range 1..={1}")]
    PointOutOfRange(usize, usize),
}

#[derive(Debug, Clone)]
pub struct BlockConfig {
    /// Degree cap for full block-lattice enumeration.
    pub lattice_cap: usize,
    /// Maximum word length when searching generator products for a full cycle.
    pub cycle_search_depth: usize,
    /// Cap on distinct products visited during the full-cycle search.
    pub cycle_search_cap: usize,
}

impl Default for BlockConfig {
    fn default() -> Self {
        BlockConfig {
            lattice_cap: 100,
            cycle_search_depth: 6,
            cycle_search_cap: 50_000,
        }
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[rb.max(ra)] = rb.min(ra);
        true
    }
}

/// The finest G-invariant partition with the seed inside one class, as the
/// full partition. The class of the seed is the minimal block containing it.
fn refine_partition(
    group: &GeneratedGroup,
    seed: &BTreeSet<usize>,
) -> Result<Dsu, BlockError> {
    let m = group.degree();
    if seed.is_empty() {
        return Err(BlockError::EmptySeed);
    }
    if let Some(&p) = seed.iter().find(|&&p| p == 0 || p > m) {
        return Err(BlockError::PointOutOfRange(p, m));
    }
    if !group.is_transitive() {
        return Err(BlockError::NotTransitive);
    }
    let mut dsu = Dsu::new(m + 1);
    let mut worklist: Vec<(usize, usize)> = Vec::new();
    let first = *seed.iter().next().expect("nonempty");
    for &x in seed.iter().skip(1) {
        if dsu.union(first, x) {
            worklist.push((first, x));
        }
    }
    while let Some((a, b)) = worklist.pop() {
        for g in group.generators() {
            let (x, y) = (g.apply(a), g.apply(b));
            if dsu.union(x, y) {
                worklist.push((x, y));
            }
        }
    }
    Ok(dsu)
}

/// The unique smallest G-block containing the seed.
pub fn minimal_block(
    group: &GeneratedGroup,
    seed: &BTreeSet<usize>,
) -> Result<BTreeSet<usize>, BlockError> {
    let mut dsu = refine_partition(group, seed)?;
    let first = *seed.iter().next().expect("nonempty");
    let root = dsu.find(first);
    Ok((1..=group.degree()).filter(|&x| dsu.find(x) == root).collect())
}

/// The full block system generated by the seed, sorted by least element.
pub fn block_system(
    group: &GeneratedGroup,
    seed: &BTreeSet<usize>,
) -> Result<Vec<BTreeSet<usize>>, BlockError> {
    let mut dsu = refine_partition(group, seed)?;
    let m = group.degree();
    let mut classes: std::collections::BTreeMap<usize, BTreeSet<usize>> = Default::default();
    for x in 1..=m {
        classes.entry(dsu.find(x)).or_default().insert(x);
    }
    Ok(classes.into_values().collect())
}

/// All blocks containing `point`, including the singleton and the full set,
/// sorted by (size, least element, lexicographic).
///
/// Every block containing the point is a join of pair-blocks, so the
/// join-closure of `{minimal_block({point, k})}` is complete.
pub fn block_lattice_at(
    group: &GeneratedGroup,
    point: usize,
    config: &BlockConfig,
) -> Result<Vec<BTreeSet<usize>>, BlockError> {
    let m = group.degree();
    if m > config.lattice_cap {
        return Err(BlockError::CapExceeded(m, config.lattice_cap));
    }
    if !group.is_transitive() {
        return Err(BlockError::NotTransitive);
    }
    let mut blocks: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    blocks.insert(BTreeSet::from([point]));
    blocks.insert((1..=m).collect());
    for k in 1..=m {
        if k != point {
            blocks.insert(minimal_block(group, &BTreeSet::from([point, k]))?);
        }
    }
    // Join closure: join(A, B) = minimal block of A ∪ B.
    loop {
        let snapshot: Vec<BTreeSet<usize>> = blocks.iter().cloned().collect();
        let mut grew = false;
        for i in 0..snapshot.len() {
            for j in (i + 1)..snapshot.len() {
                let union: BTreeSet<usize> =
                    snapshot[i].union(&snapshot[j]).cloned().collect();
                if blocks.contains(&union) {
                    continue;
                }
                let join = minimal_block(group, &union)?;
                if blocks.insert(join) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut out: Vec<BTreeSet<usize>> = blocks.into_iter().collect();
    out.sort_by_key(|b| {
        (
            b.len(),
            *b.iter().next().expect("nonempty block"),
            b.iter().cloned().collect::<Vec<_>>(),
        )
    });
    Ok(out)
}

/// True iff the only blocks are singletons and the full set.
pub fn is_primitive(group: &GeneratedGroup) -> Result<bool, BlockError> {
    if !group.is_transitive() {
        return Err(BlockError::NotTransitive);
    }
    let m = group.degree();
    if m <= 2 {
        return Ok(true);
    }
    for k in 2..=m {
        if minimal_block(group, &BTreeSet::from([1, k]))?.len() != m {
            return Ok(false);
        }
    }
    Ok(true)
}

/// JSON-facing description of one block.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct BlockReport {
    pub points: Vec<String>,
    pub size: usize,
    pub class: String,
    pub height: Option<usize>,
}

impl BlockReport {
    pub fn from_indices(shape: &TreeShape, indices: &BTreeSet<usize>) -> Self {
        let shape_class = classify_block_shape(shape, indices).expect("nonempty block");
        let (class, height) = match shape_class {
            BlockShape::SingleBranch { height } => ("branch".to_string(), Some(height)),
            BlockShape::BasicUnion { height, .. } => ("basic-union".to_string(), Some(height)),
            BlockShape::NotBasic => ("non-basic".to_string(), None),
        };
        BlockReport {
            points: indices
                .iter()
                .map(|&i| shape.word_string(&shape.word_of(i)))
                .collect(),
            size: indices.len(),
            class,
            height,
        }
    }

    pub fn is_basic(&self) -> bool {
        self.class != "non-basic"
    }

    pub fn is_branch(&self) -> bool {
        self.class == "branch"
    }
}

/// Search products of the generators (breadth-first by word length) for a
/// full cycle on all points.
pub fn certify_full_cycle(
    degree: usize,
    generators: &[Perm],
    config: &BlockConfig,
) -> Option<Perm> {
    let mut seen: std::collections::HashSet<Perm> = Default::default();
    let mut frontier: Vec<Perm> = vec![Perm::identity(degree)];
    seen.insert(Perm::identity(degree));
    for _ in 0..config.cycle_search_depth {
        let mut next = Vec::new();
        for elem in &frontier {
            for g in generators {
                let prod = g.compose(elem).expect("equal degrees");
                if prod.is_full_cycle() {
                    return Some(prod);
                }
                if seen.len() < config.cycle_search_cap && seen.insert(prod.clone()) {
                    next.push(prod);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    None
}

/// Verification report for the block-structure theorem on prime-power
/// degrees: with a full d^n-cycle present, every block must be basic, and
/// a single branch when d is prime.
#[derive(Debug, Clone, Serialize)]
pub struct FullCycleBlockReport {
    pub degree: usize,
    pub height: usize,
    pub full_cycle_order: u128,
    pub blocks: Vec<BlockReport>,
    pub all_basic: bool,
    pub all_branches: bool,
    pub degree_is_prime: bool,
    pub degree_is_prime_power: bool,
    /// The theorem's claim evaluated on this group.
    pub claim_holds: bool,
    pub counterexample: Option<BlockReport>,
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

pub fn is_prime_power(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let p = (2..).find(|k| n.is_multiple_of(*k)).expect("n >= 2 has a prime factor");
    let mut rest = n;
    while rest.is_multiple_of(p) {
        rest /= p;
    }
    rest == 1
}

/// Verify the prime-power block theorem for a subgroup of Aut(T_n) given by
/// unrolled generators: enumerate every block through point 1 and classify.
pub fn verify_main1(
    shape: &TreeShape,
    generators: &[Perm],
    config: &BlockConfig,
) -> Result<FullCycleBlockReport, BlockError> {
    check_tree_generators(shape, generators)?;
    let cycle = certify_full_cycle(shape.level_size(), generators, config).ok_or_else(|| {
        BlockError::HypothesisNotMet(
            "no full cycle found among generator products".to_string(),
        )
    })?;
    let group = GeneratedGroup::new(shape.level_size(), generators.to_vec())
        .expect("degrees checked");
    let lattice = block_lattice_at(&group, 1, config)?;
    let blocks: Vec<BlockReport> = lattice
        .iter()
        .map(|b| BlockReport::from_indices(shape, b))
        .collect();
    let all_basic = blocks.iter().all(BlockReport::is_basic);
    let all_branches = blocks.iter().all(BlockReport::is_branch);
    let degree_is_prime = is_prime(shape.degree);
    let degree_is_prime_power = is_prime_power(shape.degree);
    let claim_holds = (!degree_is_prime_power || all_basic) && (!degree_is_prime || all_branches);
    let counterexample = if degree_is_prime {
        blocks.iter().find(|b| !b.is_branch()).cloned()
    } else if degree_is_prime_power {
        blocks.iter().find(|b| !b.is_basic()).cloned()
    } else {
        blocks.iter().find(|b| !b.is_basic()).cloned()
    };
    Ok(FullCycleBlockReport {
        degree: shape.degree,
        height: shape.height,
        full_cycle_order: cycle.order(),
        blocks,
        all_basic,
        all_branches,
        degree_is_prime,
        degree_is_prime_power,
        claim_holds,
        counterexample,
    })
}

/// Verification report for the primitive-level-1 theorem: every seed pair in
/// distinct major branches must have the full level as its minimal block.
#[derive(Debug, Clone, Serialize)]
pub struct PrimitiveLevelOneReport {
    pub degree: usize,
    pub height: usize,
    pub full_cycle_order: u128,
    pub level_one_order: u128,
    pub pairs_checked: usize,
    pub holds: bool,
    pub counterexample: Option<(String, String, BlockReport)>,
}

pub fn verify_main3(
    shape: &TreeShape,
    generators: &[Perm],
    config: &BlockConfig,
) -> Result<PrimitiveLevelOneReport, BlockError> {
    check_tree_generators(shape, generators)?;
    let cycle = certify_full_cycle(shape.level_size(), generators, config).ok_or_else(|| {
        BlockError::HypothesisNotMet(
            "no full cycle found among generator products".to_string(),
        )
    })?;
    let roots: Vec<Perm> = generators
        .iter()
        .map(|g| root_restriction(shape, g).expect("tree automorphism"))
        .collect();
    let level_one = GeneratedGroup::new(shape.degree, roots).expect("degrees match");
    if !is_primitive(&level_one)? {
        return Err(BlockError::HypothesisNotMet(
            "level-1 restriction is not primitive".to_string(),
        ));
    }
    let group = GeneratedGroup::new(shape.level_size(), generators.to_vec())
        .expect("degrees checked");
    let m = shape.level_size();
    let mut pairs_checked = 0usize;
    let mut counterexample = None;
    'outer: for a in 1..=m {
        for b in (a + 1)..=m {
            if shape.major_branch_of(a) == shape.major_branch_of(b) {
                continue;
            }
            pairs_checked += 1;
            let block = minimal_block(&group, &BTreeSet::from([a, b]))?;
            if block.len() != m {
                counterexample = Some((
                    shape.word_string(&shape.word_of(a)),
                    shape.word_string(&shape.word_of(b)),
                    BlockReport::from_indices(shape, &block),
                ));
                break 'outer;
            }
        }
    }
    Ok(PrimitiveLevelOneReport {
        degree: shape.degree,
        height: shape.height,
        full_cycle_order: cycle.order(),
        level_one_order: level_one.order(),
        pairs_checked,
        holds: counterexample.is_none(),
        counterexample,
    })
}

fn check_tree_generators(shape: &TreeShape, generators: &[Perm]) -> Result<(), BlockError> {
    if generators.is_empty() {
        return Err(BlockError::HypothesisNotMet("no generators".to_string()));
    }
    for g in generators {
        if g.degree() != shape.level_size() {
            return Err(BlockError::HypothesisNotMet(format!(
                "generator degree {} does not match level size {}",
                g.degree(),
                shape.level_size()
            )));
        }
        if !is_tree_automorphism(shape, g) {
            return Err(BlockError::HypothesisNotMet(
                "generator does not preserve the tree".to_string(),
            ));
        }
    }
    Ok(())
}

/// Cyclic-group block construction for composite degree pq: the orbit of
/// point 1 under σ^(q^n), where σ is the level-n odometer cycle. The orbit
/// is a block of ⟨σ⟩ with p^n elements and is never basic.
#[derive(Debug, Clone, Serialize)]
pub struct PowerMapBlockReport {
    pub p: usize,
    pub q: usize,
    pub height: usize,
    pub level_size: usize,
    pub block: BlockReport,
    pub verified_block: bool,
}

pub fn power_map_blocks(p: usize, q: usize, n: usize) -> PowerMapBlockReport {
    assert!(is_prime(p) && is_prime(q) && p < q, "need primes p < q");
    assert!(n >= 2, "needs level at least 2");
    let d = p * q;
    let shape = TreeShape::new(d, n);
    let (machine, state) = Automaton::adding_machine(d);
    let sigma = machine.unroll(state, n);
    let step = sigma.pow(q.pow(n as u32) as i64);
    let mut orbit = BTreeSet::new();
    let mut x = 1usize;
    loop {
        if !orbit.insert(x) {
            break;
        }
        x = step.apply(x);
    }
    // Verify the block property against every element of ⟨σ⟩.
    let mut verified = true;
    let mut power = sigma.clone();
    while !power.is_identity() {
        let image: BTreeSet<usize> = orbit.iter().map(|&v| power.apply(v)).collect();
        let inter: Vec<usize> = image.intersection(&orbit).cloned().collect();
        if !(inter.is_empty() || inter.len() == orbit.len()) {
            verified = false;
            break;
        }
        power = sigma.compose(&power).expect("equal degrees");
    }
    PowerMapBlockReport {
        p,
        q,
        height: n,
        level_size: shape.level_size(),
        block: BlockReport::from_indices(&shape, &orbit),
        verified_block: verified,
    }
}

/// Size of the minimal block around a seed spanning at least two major
/// branches, and whether it exceeds d^(n−1).
#[derive(Debug, Clone, Serialize)]
pub struct FatouOracleReport {
    pub block_size: usize,
    pub threshold: usize,
    pub exceeds: bool,
    pub block: BlockReport,
}

pub fn fatou_oracle(
    shape: &TreeShape,
    group: &GeneratedGroup,
    seed: &BTreeSet<usize>,
) -> Result<FatouOracleReport, BlockError> {
    let branches: BTreeSet<usize> = seed.iter().map(|&x| shape.major_branch_of(x)).collect();
    if branches.len() < 2 {
        return Err(BlockError::SeedInOneBranch);
    }
    let block = minimal_block(group, seed)?;
    let threshold = shape.degree.pow((shape.height - 1) as u32);
    Ok(FatouOracleReport {
        block_size: block.len(),
        threshold,
        exceeds: block.len() > threshold,
        block: BlockReport::from_indices(shape, &block),
    })
}
