//! Exact constraint solving over the rationals plus a Herbrand
//! unification and disequality solver.
//!
//! A [`Store`] holds a conjunction of linear rational constraints, a
//! substitution, and pending disequalities.  Adding is transactional:
//! an inconsistent constraint leaves the store untouched.  Numeric
//! satisfiability, entailment, and projection all go through
//! Fourier-Motzkin elimination; stores in the intended workloads stay
//! small, so its worst case never bites.

mod fm;
pub mod negate;
mod store;

pub use fm::{CanonRow, Rel};
pub use store::{DiseqBranches, Store, StoreMark};
