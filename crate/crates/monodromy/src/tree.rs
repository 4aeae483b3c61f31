//! The complete d-ary rooted tree of height n: vertex words over the
//! alphabet `{1..d}`, branches, the level distance, and the classification
//! of point sets as branches, basic unions, or neither.
//!
//! A level-n vertex is a word `w_1 … w_n`; its flat 1-based index is the
//! lexicographic rank with the first letter most significant, so each major
//! branch (fixed first letter) is a contiguous index range.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::perm::Perm;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("word length {0} does not match tree height {1}")]
    WordLength(usize, usize),
    #[error("letter {0} out of range 1..={1}")]
    LetterOutOfRange(usize, usize),
    #[error("empty point set")]
    EmptySet,
    #[error("permutation degree {0} does not match level size {1}")]
    DegreeMismatch(usize, usize),
}

/// Shape of a complete d-ary rooted tree of height n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeShape {
    pub degree: usize,
    pub height: usize,
}

pub type Word = Vec<usize>;

impl TreeShape {
    pub fn new(degree: usize, height: usize) -> Self {
        assert!(degree >= 2, "tree degree must be at least 2");
        assert!(height >= 1, "tree height must be at least 1");
        TreeShape { degree, height }
    }

    /// Number of vertices at the top level, d^n.
    pub fn level_size(&self) -> usize {
        self.degree.pow(self.height as u32)
    }

    /// Flat 1-based index of a full-height word.
    pub fn index_of(&self, word: &[usize]) -> Result<usize, TreeError> {
        if word.len() != self.height {
            return Err(TreeError::WordLength(word.len(), self.height));
        }
        let mut index = 0usize;
        for &letter in word {
            if letter == 0 || letter > self.degree {
                return Err(TreeError::LetterOutOfRange(letter, self.degree));
            }
            index = index * self.degree + (letter - 1);
        }
        Ok(index + 1)
    }

    /// Word of a flat 1-based index at the top level.
    pub fn word_of(&self, index: usize) -> Word {
        assert!(index >= 1 && index <= self.level_size());
        let mut rest = index - 1;
        let mut word = vec![0usize; self.height];
        for k in (0..self.height).rev() {
            word[k] = rest % self.degree + 1;
            rest /= self.degree;
        }
        word
    }

    pub fn word_string(&self, word: &[usize]) -> String {
        if self.degree <= 9 {
            word.iter().map(|l| l.to_string()).collect()
        } else {
            word.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    /// All level-n words in flat-index order.
    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        (1..=self.level_size()).map(|i| self.word_of(i))
    }

    /// Distance between two level-n vertices: n minus the length of their
    /// longest common prefix. Equals n exactly when the first letters differ.
    pub fn distance(&self, v: &[usize], w: &[usize]) -> Result<usize, TreeError> {
        if v.len() != self.height || w.len() != self.height {
            return Err(TreeError::WordLength(v.len().max(w.len()), self.height));
        }
        let common = v.iter().zip(w).take_while(|(a, b)| a == b).count();
        Ok(self.height - common)
    }

    /// The branch of height `m` defined by a prefix word of length `n − m`:
    /// all full-height words extending the prefix, as flat indices.
    pub fn branch_indices(&self, prefix: &[usize]) -> Vec<usize> {
        let m = self.height - prefix.len();
        let size = self.degree.pow(m as u32);
        let mut start = 0usize;
        for &letter in prefix {
            start = start * self.degree + (letter - 1);
        }
        let start = start * size + 1;
        (start..start + size).collect()
    }

    /// Major branch (height n−1) containing a flat index: its first letter.
    pub fn major_branch_of(&self, index: usize) -> usize {
        (index - 1) / self.degree.pow((self.height - 1) as u32) + 1
    }
}

/// Outcome of classifying a set of top-level vertices against the tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BlockShape {
    /// The set is exactly one branch of the given height.
    SingleBranch { height: usize },
    /// A union of `count ≥ 2` equal-height branches all inside one branch of
    /// height one more.
    BasicUnion { height: usize, count: usize },
    /// Anything else.
    NotBasic,
}

impl BlockShape {
    pub fn is_basic(&self) -> bool {
        !matches!(self, BlockShape::NotBasic)
    }

    pub fn is_branch(&self) -> bool {
        matches!(self, BlockShape::SingleBranch { .. })
    }
}

/// Classify a nonempty set of top-level vertices (flat indices).
pub fn classify_block_shape(
    shape: &TreeShape,
    indices: &BTreeSet<usize>,
) -> Result<BlockShape, TreeError> {
    if indices.is_empty() {
        return Err(TreeError::EmptySet);
    }
    let words: Vec<Word> = indices.iter().map(|&i| shape.word_of(i)).collect();
    // Longest common prefix of the whole set.
    let mut prefix_len = shape.height;
    for w in &words[1..] {
        let common = words[0].iter().zip(w).take_while(|(a, b)| a == b).count();
        prefix_len = prefix_len.min(common);
    }
    let enclosing_height = shape.height - prefix_len;
    let branch_size = shape.degree.pow(enclosing_height as u32);
    if words.len() == branch_size {
        // The set sits inside the enclosing branch and has its full size,
        // so it is exactly that branch.
        return Ok(BlockShape::SingleBranch {
            height: enclosing_height,
        });
    }
    if enclosing_height == 0 {
        return Ok(BlockShape::SingleBranch { height: 0 });
    }
    // Basic union candidates: parts of height one less than the enclosing
    // branch, grouped by the next letter after the common prefix.
    let part_height = enclosing_height - 1;
    let part_size = shape.degree.pow(part_height as u32);
    let mut groups: BTreeMap<usize, usize> = BTreeMap::new();
    for w in &words {
        *groups.entry(w[prefix_len]).or_insert(0) += 1;
    }
    if groups.values().all(|&c| c == part_size) {
        // Each group has the size of a full part; since the part is an
        // interval of indices determined by its prefix, equal count within
        // the group's index range implies completeness.
        let complete = groups.keys().all(|&letter| {
            let mut prefix = words[0][..prefix_len].to_vec();
            prefix.push(letter);
            shape
                .branch_indices(&prefix)
                .iter()
                .all(|i| indices.contains(i))
        });
        if complete {
            return Ok(BlockShape::BasicUnion {
                height: part_height,
                count: groups.len(),
            });
        }
    }
    Ok(BlockShape::NotBasic)
}

/// True iff the permutation of the top level respects the tree: the induced
/// map on every intermediate level is well-defined (prefix-compatible).
pub fn is_tree_automorphism(shape: &TreeShape, perm: &Perm) -> bool {
    if perm.degree() != shape.level_size() {
        return false;
    }
    for cut in 1..shape.height {
        let block = shape.degree.pow((shape.height - cut) as u32);
        // Vertices sharing a length-`cut` prefix form contiguous runs of
        // `block` indices; their images must again share a prefix.
        for run in 0..(shape.level_size() / block) {
            let first_image = (perm.apply(run * block + 1) - 1) / block;
            for offset in 1..block {
                if (perm.apply(run * block + offset + 1) - 1) / block != first_image {
                    return false;
                }
            }
        }
    }
    true
}

/// Level-1 restriction of a tree automorphism: the permutation it induces on
/// major branches. `None` if the permutation does not preserve the tree.
pub fn root_restriction(shape: &TreeShape, perm: &Perm) -> Option<Perm> {
    if !is_tree_automorphism(shape, perm) {
        return None;
    }
    let images: Vec<usize> = (1..=shape.degree)
        .map(|i| {
            let block = shape.degree.pow((shape.height - 1) as u32);
            shape.major_branch_of(perm.apply((i - 1) * block + 1))
        })
        .collect();
    Perm::from_images(images).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_roundtrip() {
        let shape = TreeShape::new(6, 2);
        assert_eq!(shape.level_size(), 36);
        for i in 1..=36 {
            assert_eq!(shape.index_of(&shape.word_of(i)).unwrap(), i);
        }
        assert_eq!(shape.index_of(&[1, 1]).unwrap(), 1);
        assert_eq!(shape.index_of(&[2, 2]).unwrap(), 8);
        assert_eq!(shape.major_branch_of(8), 2);
    }

    #[test]
    fn distance_cases() {
        let shape = TreeShape::new(2, 3);
        assert_eq!(shape.distance(&[1, 1, 1], &[2, 1, 1]).unwrap(), 3);
        assert_eq!(shape.distance(&[1, 1, 1], &[1, 1, 2]).unwrap(), 1);
        assert_eq!(shape.distance(&[1, 1, 1], &[1, 1, 1]).unwrap(), 0);
        assert!(shape.distance(&[1, 1], &[1, 1, 1]).is_err());
    }

    #[test]
    fn distance_symmetry_and_major_branch() {
        let shape = TreeShape::new(3, 3);
        for i in 1..=shape.level_size() {
            for j in 1..=shape.level_size() {
                let v = shape.word_of(i);
                let w = shape.word_of(j);
                let d = shape.distance(&v, &w).unwrap();
                assert_eq!(d, shape.distance(&w, &v).unwrap());
                assert_eq!(
                    d == shape.height,
                    shape.major_branch_of(i) != shape.major_branch_of(j)
                );
            }
        }
    }

    #[test]
    fn classify_single_branch() {
        let shape = TreeShape::new(6, 2);
        let major: BTreeSet<usize> = shape.branch_indices(&[1]).into_iter().collect();
        assert_eq!(
            classify_block_shape(&shape, &major).unwrap(),
            BlockShape::SingleBranch { height: 1 }
        );
        let singleton = BTreeSet::from([7]);
        assert_eq!(
            classify_block_shape(&shape, &singleton).unwrap(),
            BlockShape::SingleBranch { height: 0 }
        );
        let all: BTreeSet<usize> = (1..=36).collect();
        assert_eq!(
            classify_block_shape(&shape, &all).unwrap(),
            BlockShape::SingleBranch { height: 2 }
        );
    }

    #[test]
    fn classify_klein_partition_not_basic() {
        // Binary tree of height 2 with parts {11, 21}: two height-0 branches
        // in different major branches.
        let shape = TreeShape::new(2, 2);
        let e = BTreeSet::from([
            shape.index_of(&[1, 1]).unwrap(),
            shape.index_of(&[2, 1]).unwrap(),
        ]);
        assert_eq!(classify_block_shape(&shape, &e).unwrap(), BlockShape::NotBasic);
    }

    #[test]
    fn classify_quartic_block_basic_union() {
        let shape = TreeShape::new(4, 1);
        let e = BTreeSet::from([1, 3]);
        assert_eq!(
            classify_block_shape(&shape, &e).unwrap(),
            BlockShape::BasicUnion {
                height: 0,
                count: 2
            }
        );
    }

    #[test]
    fn classify_sibling_union_is_basic() {
        let shape = TreeShape::new(3, 2);
        // Branches 11* and 13* of height 0... words [1,1] and [1,3]: two
        // height-0 branches inside major branch 1.
        let e = BTreeSet::from([
            shape.index_of(&[1, 1]).unwrap(),
            shape.index_of(&[1, 3]).unwrap(),
        ]);
        assert_eq!(
            classify_block_shape(&shape, &e).unwrap(),
            BlockShape::BasicUnion {
                height: 0,
                count: 2
            }
        );
        // An incomplete mix is not basic.
        let bad = BTreeSet::from([
            shape.index_of(&[1, 1]).unwrap(),
            shape.index_of(&[1, 2]).unwrap(),
            shape.index_of(&[2, 1]).unwrap(),
        ]);
        assert_eq!(
            classify_block_shape(&shape, &bad).unwrap(),
            BlockShape::NotBasic
        );
    }

    #[test]
    fn tree_automorphism_detection() {
        let shape = TreeShape::new(2, 2);
        // Swap within one major branch: fine.
        let ok = Perm::parse(4, "(1 2)").unwrap();
        assert!(is_tree_automorphism(&shape, &ok));
        assert_eq!(
            root_restriction(&shape, &ok).unwrap(),
            Perm::identity(2)
        );
        // Swap across branches breaking siblings: not a tree map.
        let bad = Perm::parse(4, "(2 3)").unwrap();
        assert!(!is_tree_automorphism(&shape, &bad));
        // Swap the two major branches wholesale: fine.
        let swap = Perm::parse(4, "(1 3)(2 4)").unwrap();
        assert!(is_tree_automorphism(&shape, &swap));
        assert_eq!(
            root_restriction(&shape, &swap).unwrap(),
            Perm::parse(2, "(1 2)").unwrap()
        );
    }
}
