//! Critical portraits and enumeration of monodromy candidates: generator
//! tuples with prescribed cycle types whose product is a full cycle,
//! deduplicated under simultaneous conjugation, each tagged with the group
//! it generates.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::blocks::{block_system, minimal_block};
use crate::group::GeneratedGroup;
use crate::perm::Perm;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HurwitzError {
    #[error("invalid portrait: {0}")]
    InvalidPortrait(String),
    #[error("degree {0} exceeds the enumeration cap {1}")]
    DegreeCap(usize, usize),
    #[error("tuple search space too large: {0} raw tuples")]
    SearchSpace(u128),
}

pub const ENUMERATION_DEGREE_CAP: usize = 7;
const RAW_TUPLE_CAP: u128 = 200_000_000;

/// A critical portrait: the degree plus, per critical value, the multiset of
/// local degrees (each ≥ 2) of the critical points above it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalPortrait {
    pub degree: usize,
    pub values: Vec<Vec<usize>>,
}

impl CriticalPortrait {
    pub fn new(degree: usize, values: Vec<Vec<usize>>) -> Result<Self, HurwitzError> {
        let mut values: Vec<Vec<usize>> = values
            .into_iter()
            .map(|mut v| {
                v.sort_unstable_by(|a, b| b.cmp(a));
                v
            })
            .collect();
        values.sort_unstable_by(|a, b| b.cmp(a));
        let portrait = CriticalPortrait { degree, values };
        portrait.validate()?;
        Ok(portrait)
    }

    pub fn validate(&self) -> Result<(), HurwitzError> {
        if self.degree < 2 {
            return Err(HurwitzError::InvalidPortrait("degree must be ≥ 2".into()));
        }
        if self.values.is_empty() {
            return Err(HurwitzError::InvalidPortrait("no critical values".into()));
        }
        let mut total = 0usize;
        for value in &self.values {
            if value.is_empty() {
                return Err(HurwitzError::InvalidPortrait(
                    "critical value with no critical points".into(),
                ));
            }
            if value.iter().any(|&k| k < 2) {
                return Err(HurwitzError::InvalidPortrait(
                    "local degree below 2".into(),
                ));
            }
            let sheets: usize = value.iter().sum();
            if sheets > self.degree {
                return Err(HurwitzError::InvalidPortrait(format!(
                    "value absorbs {sheets} sheets, more than the degree {}",
                    self.degree
                )));
            }
            total += value.iter().map(|&k| k - 1).sum::<usize>();
        }
        if total != self.degree - 1 {
            return Err(HurwitzError::InvalidPortrait(format!(
                "ramification total {total} differs from degree − 1 = {}",
                self.degree - 1
            )));
        }
        Ok(())
    }

    /// Parse `d=6; v1:{2,2}; v2:{2,2}; v3:{2}`.
    pub fn parse(text: &str) -> Result<Self, HurwitzError> {
        let mut degree = None;
        let mut values = Vec::new();
        for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some(d) = part.strip_prefix("d=") {
                degree = Some(d.trim().parse::<usize>().map_err(|_| {
                    HurwitzError::InvalidPortrait(format!("bad degree in {part:?}"))
                })?);
            } else {
                let body = part
                    .split_once(':')
                    .map(|(_, b)| b)
                    .unwrap_or(part)
                    .trim()
                    .trim_start_matches('{')
                    .trim_end_matches('}');
                let degs: Vec<usize> = body
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<usize>().map_err(|_| {
                            HurwitzError::InvalidPortrait(format!("bad local degree in {part:?}"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                values.push(degs);
            }
        }
        let degree = degree
            .ok_or_else(|| HurwitzError::InvalidPortrait("missing d=".into()))?;
        CriticalPortrait::new(degree, values)
    }
}

impl std::fmt::Display for CriticalPortrait {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d={}", self.degree)?;
        for (i, value) in self.values.iter().enumerate() {
            let degs: Vec<String> = value.iter().map(|k| k.to_string()).collect();
            write!(f, "; v{}:{{{}}}", i + 1, degs.join(","))?;
        }
        Ok(())
    }
}

/// Cycle type of the loop generator at one critical value: one k-cycle per
/// critical preimage of local degree k, the other points fixed. Returned
/// descending, padded with 1s to the degree.
pub fn generator_cycle_type(value: &[usize], degree: usize) -> Vec<usize> {
    let mut t: Vec<usize> = value.to_vec();
    let moved: usize = t.iter().sum();
    t.extend(std::iter::repeat_n(1, degree - moved));
    t.sort_unstable_by(|a, b| b.cmp(a));
    t
}

/// One simultaneous-conjugation class of generator tuples.
#[derive(Debug, Clone, Serialize)]
pub struct TupleClass {
    /// Canonical representative tuple, in the portrait's value order.
    pub representative: Vec<String>,
    pub tuple_count: usize,
    pub group_order: u128,
    /// Sizes of the classes of a proper block system, when one exists.
    pub proper_block_sizes: Option<Vec<usize>>,
}

pub struct Enumeration {
    pub classes: Vec<TupleClass>,
    pub reps: Vec<Vec<Perm>>,
}

/// Enumerate all tuples with the portrait's cycle types whose product in
/// list order (first generator applied first) is a single d-cycle, up to
/// simultaneous conjugation.
pub fn enumerate_tuples(portrait: &CriticalPortrait) -> Result<Enumeration, HurwitzError> {
    portrait.validate()?;
    let d = portrait.degree;
    if d > ENUMERATION_DEGREE_CAP {
        return Err(HurwitzError::DegreeCap(d, ENUMERATION_DEGREE_CAP));
    }
    let all = all_perms(d);
    let mut by_type: BTreeMap<Vec<usize>, Vec<Perm>> = BTreeMap::new();
    for p in &all {
        by_type.entry(p.cycle_type()).or_default().push(p.clone());
    }
    let candidate_sets: Vec<&Vec<Perm>> = portrait
        .values
        .iter()
        .map(|v| {
            let t = generator_cycle_type(v, d);
            by_type.get(&t).unwrap_or(&EMPTY)
        })
        .collect();
    let raw: u128 = candidate_sets.iter().map(|c| c.len() as u128).product();
    if raw > RAW_TUPLE_CAP {
        return Err(HurwitzError::SearchSpace(raw));
    }

    let canonicalizer = Canonicalizer::new(d, &all);
    let mut class_counts: BTreeMap<Vec<Perm>, usize> = BTreeMap::new();
    let mut stack: Vec<Perm> = Vec::new();
    let mut products: Vec<Perm> = vec![Perm::identity(d)];
    enumerate_rec(
        &candidate_sets,
        0,
        &mut stack,
        &mut products,
        &canonicalizer,
        &mut class_counts,
    );

    let mut classes = Vec::new();
    let mut reps = Vec::new();
    for (rep, count) in class_counts {
        let group = GeneratedGroup::new(d, rep.clone()).expect("equal degrees");
        let group_order = group.order();
        let proper_block_sizes = proper_block_sizes(&group);
        classes.push(TupleClass {
            representative: rep.iter().map(|p| p.to_string()).collect(),
            tuple_count: count,
            group_order,
            proper_block_sizes,
        });
        reps.push(rep);
    }
    Ok(Enumeration { classes, reps })
}

static EMPTY: Vec<Perm> = Vec::new();

fn enumerate_rec(
    candidates: &[&Vec<Perm>],
    depth: usize,
    stack: &mut Vec<Perm>,
    products: &mut Vec<Perm>,
    canonicalizer: &Canonicalizer,
    out: &mut BTreeMap<Vec<Perm>, usize>,
) {
    if depth == candidates.len() {
        let product = products.last().expect("nonempty");
        if product.is_full_cycle() {
            let canon = canonicalizer.canonical(stack);
            *out.entry(canon).or_insert(0) += 1;
        }
        return;
    }
    for cand in candidates[depth].iter() {
        let prev = products.last().expect("nonempty");
        // Product in list order: this generator is applied after the prefix.
        let next = cand.compose(prev).expect("equal degrees");
        stack.push(cand.clone());
        products.push(next);
        enumerate_rec(candidates, depth + 1, stack, products, canonicalizer, out);
        stack.pop();
        products.pop();
    }
}

fn proper_block_sizes(group: &GeneratedGroup) -> Option<Vec<usize>> {
    if !group.is_transitive() {
        return None;
    }
    let m = group.degree();
    for k in 2..=m {
        let block = minimal_block(group, &BTreeSet::from([1, k])).expect("transitive");
        if block.len() < m {
            let system = block_system(group, &block).expect("transitive");
            return Some(system.iter().map(|b| b.len()).collect());
        }
    }
    None
}

/// Canonical form of a tuple under simultaneous conjugation: the first
/// entry is conjugated to a fixed representative of its cycle type, then
/// the minimum over the centralizer of that representative is taken.
struct Canonicalizer {
    degree: usize,
    centralizers: std::cell::RefCell<BTreeMap<Vec<usize>, Vec<Perm>>>,
    all: Vec<Perm>,
}

impl Canonicalizer {
    fn new(degree: usize, all: &[Perm]) -> Self {
        Canonicalizer {
            degree,
            centralizers: Default::default(),
            all: all.to_vec(),
        }
    }

    fn canonical(&self, tuple: &[Perm]) -> Vec<Perm> {
        let first = &tuple[0];
        let target = type_representative(self.degree, &first.cycle_type());
        let to_rep = conjugator_onto(first, &target);
        let mut cache = self.centralizers.borrow_mut();
        let centralizer = cache
            .entry(first.cycle_type())
            .or_insert_with(|| {
                self.all
                    .iter()
                    .filter(|c| {
                        c.compose(&target).expect("deg") == target.compose(c).expect("deg")
                    })
                    .cloned()
                    .collect()
            });
        let mut best: Option<Vec<Perm>> = None;
        for c in centralizer.iter() {
            let t = c.compose(&to_rep).expect("deg");
            let candidate: Vec<Perm> = tuple.iter().map(|g| g.conjugate_by(&t)).collect();
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
        }
        best.expect("centralizer contains the identity")
    }
}

/// The standard permutation of a cycle type: cycles on consecutive points,
/// longest first.
fn type_representative(degree: usize, cycle_type: &[usize]) -> Perm {
    let mut cycles = Vec::new();
    let mut next = 1usize;
    for &len in cycle_type {
        if len > 1 {
            cycles.push((next..next + len).collect::<Vec<usize>>());
        }
        next += len;
    }
    Perm::from_cycles(degree, &cycles).expect("disjoint consecutive cycles")
}

/// A permutation t with t·g·t⁻¹ = target, for g and target of equal cycle type.
fn conjugator_onto(g: &Perm, target: &Perm) -> Perm {
    let degree = g.degree();
    let mut cycles_g = g.cycles();
    let mut cycles_t = target.cycles();
    cycles_g.extend(g.fixed_points().into_iter().map(|x| vec![x]));
    cycles_t.extend(target.fixed_points().into_iter().map(|x| vec![x]));
    let by_len = |cs: &mut Vec<Vec<usize>>| {
        cs.sort_by_key(|c| (std::cmp::Reverse(c.len()), c[0]));
    };
    by_len(&mut cycles_g);
    by_len(&mut cycles_t);
    let mut images = vec![0usize; degree];
    for (cg, ct) in cycles_g.iter().zip(&cycles_t) {
        debug_assert_eq!(cg.len(), ct.len());
        for (a, b) in cg.iter().zip(ct) {
            images[a - 1] = *b;
        }
    }
    Perm::from_images(images).expect("cycle match is a bijection")
}

fn all_perms(degree: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut images: Vec<usize> = (1..=degree).collect();
    heap_permute(&mut images, degree, &mut out);
    out.sort();
    out
}

fn heap_permute(images: &mut Vec<usize>, k: usize, out: &mut Vec<Perm>) {
    if k == 1 {
        out.push(Perm::from_images(images.clone()).expect("permutation"));
        return;
    }
    for i in 0..k {
        heap_permute(images, k - 1, out);
        if k.is_multiple_of(2) {
            images.swap(i, k - 1);
        } else {
            images.swap(0, k - 1);
        }
    }
}

/// Report for the portrait-determines-group question.
#[derive(Debug, Clone, Serialize)]
pub struct PortraitReport {
    pub portrait: String,
    pub determined: bool,
    pub class_count: usize,
    pub group_conjugacy_classes: usize,
    /// Count of distinct (order, element-cycle-type census) signatures, a
    /// weaker isomorphism-flavored invariant reported alongside conjugacy.
    pub order_census_classes: usize,
    pub classes: Vec<TupleClass>,
}

/// Decide whether every enumerated tuple generates an S_d-conjugate group.
pub fn portrait_determines_group(
    portrait: &CriticalPortrait,
) -> Result<PortraitReport, HurwitzError> {
    let enumeration = enumerate_tuples(portrait)?;
    let d = portrait.degree;
    let groups: Vec<GeneratedGroup> = enumeration
        .reps
        .iter()
        .map(|rep| GeneratedGroup::new(d, rep.clone()).expect("equal degrees"))
        .collect();
    let signatures: Vec<(u128, Vec<Vec<usize>>)> =
        groups.iter().map(group_signature).collect();
    let mut conjugacy_reps: Vec<usize> = Vec::new();
    let mut conjugacy_classes = 0usize;
    let all = all_perms(d);
    for i in 0..groups.len() {
        let mut found = false;
        for &j in &conjugacy_reps {
            if signatures[i] == signatures[j]
                && groups_conjugate(&groups[i], &groups[j], &all)
            {
                found = true;
                break;
            }
        }
        if !found {
            conjugacy_reps.push(i);
            conjugacy_classes += 1;
        }
    }
    let order_census_classes = signatures
        .iter()
        .collect::<BTreeSet<_>>()
        .len();
    Ok(PortraitReport {
        portrait: portrait.to_string(),
        determined: conjugacy_classes <= 1,
        class_count: enumeration.classes.len(),
        group_conjugacy_classes: conjugacy_classes,
        order_census_classes,
        classes: enumeration.classes,
    })
}

fn group_signature(group: &GeneratedGroup) -> (u128, Vec<Vec<usize>>) {
    let elems = group.closure().expect("enumeration groups are small");
    let mut census: Vec<Vec<usize>> = elems.iter().map(|e| e.cycle_type()).collect();
    census.sort();
    (elems.len() as u128, census)
}

fn groups_conjugate(g: &GeneratedGroup, h: &GeneratedGroup, all: &[Perm]) -> bool {
    if g.order() != h.order() {
        return false;
    }
    let h_elems: &HashSet<Perm> = h.closure().expect("small");
    all.iter().any(|t| {
        g.generators()
            .iter()
            .all(|gen| h_elems.contains(&gen.conjugate_by(t)))
    })
}

/// All valid portraits of a given degree, canonically ordered.
pub fn all_portraits(degree: usize) -> Vec<CriticalPortrait> {
    // A critical value of weight w (sum of local degrees minus one each) is
    // a partition of w; the portrait is a multiset of such values with total
    // weight degree − 1 and per-value sheet count ≤ degree.
    let structures = value_structures(degree);
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    collect_portraits(
        degree,
        degree - 1,
        0,
        &structures,
        &mut current,
        &mut out,
    );
    out
}

/// All single-value structures for a given degree: (weight, local degrees).
fn value_structures(degree: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for weight in 1..degree {
        for partition in partitions(weight) {
            let degs: Vec<usize> = partition.iter().map(|p| p + 1).collect();
            if degs.iter().sum::<usize>() <= degree {
                out.push((weight, degs));
            }
        }
    }
    out
}

fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            prefix.push(part);
            rec(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn collect_portraits(
    degree: usize,
    remaining: usize,
    min_index: usize,
    structures: &[(usize, Vec<usize>)],
    current: &mut Vec<usize>,
    out: &mut Vec<CriticalPortrait>,
) {
    if remaining == 0 {
        let values: Vec<Vec<usize>> = current
            .iter()
            .map(|&i| structures[i].1.clone())
            .collect();
        if let Ok(p) = CriticalPortrait::new(degree, values) {
            out.push(p);
        }
        return;
    }
    for i in min_index..structures.len() {
        let (weight, _) = &structures[i];
        if *weight <= remaining {
            current.push(i);
            collect_portraits(degree, remaining - weight, i, structures, current, out);
            current.pop();
        }
    }
}
