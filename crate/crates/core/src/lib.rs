//! Finite posets and the fixed point property.
//!
//! Posets of up to 64 elements are stored as closed relation bitsets. On top
//! of that the crate provides exhaustive searches for fixed-point-free maps,
//! retractions and automorphisms; constructors and recognizers for crowns,
//! towers, stacks, generalized crowns and sections; small-poset enumeration;
//! and a set of verification suites that replay known structural results.

pub mod bits;
pub mod canon;
pub mod enumerate;
pub mod error;
pub mod gencrown;
pub mod io;
pub mod order_map;
pub mod poset;
pub mod search;
pub mod sections;
pub mod towers;
pub mod verify;

pub use canon::{canonical_form, is_isomorphic, CanonicalForm};
pub use error::{Error, Result, StackDefect};
pub use order_map::OrderMap;
pub use poset::{Dismantling, Poset, RankProfile, Width};
pub use search::{FppVerdict, SearchBudget};
