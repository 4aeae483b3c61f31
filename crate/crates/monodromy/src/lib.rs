//! Monodromy groups of complex polynomial iterates, computed numerically,
//! represented as tree automorphisms by wreath recursion, and analyzed for
//! the block structure of their action on preimage trees.

pub mod automaton;
pub mod blocks;
pub mod config;
pub mod conservative;
pub mod construct;
pub mod engine;
pub mod group;
pub mod hurwitz;
pub mod path;
pub mod perm;
pub mod poly;
pub mod tree;
pub mod verify;
