//! Pattern-avoiding stack machines on Cayley permutations.
//!
//! A sigma-stack is a right-greedy stack whose content, read top to bottom,
//! never contains `sigma`. The sigma-machine follows it with a `21`-stack;
//! pop-stacks empty themselves whenever a push would be illegal.

pub mod cayley;
pub mod census;
pub mod dyck;
pub mod error;
pub mod pattern;
pub mod stack;

pub use cayley::{CayleyPerm, Word};
pub use error::{Error, Result};
