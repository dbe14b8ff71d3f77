//! Exhaustive, isomorphism-free enumeration of finite lattices.
//!
//! Lattices are kept in levellised form and built level by level; each
//! isomorphism class is visited exactly once by accepting only configurations
//! whose per-level packed words are minimal under a stabiliser chain, with
//! the group action realised as Beneš-network bit permutations.

pub mod canonical;
pub mod enumerate;
pub mod extension;
pub mod oracle;
pub mod permgroup;
pub mod poset;

pub use enumerate::{
    children, compose_counts, cycle_counter, enumerate, enumerate_with_sink, format_count_table,
    CountTable, EnumConfig, Mode, SearchNode,
};
pub use poset::{LabelSet, LevelledLattice, N_MAX};
