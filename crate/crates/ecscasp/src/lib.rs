//! A goal-directed solver for constraint answer set programs over exact
//! rationals, bundled with a basic event calculus theory and narrative
//! scenarios.
//!
//! The pipeline: programs are parsed and normalized ([`syntax`]), the
//! constructive negation of every predicate is synthesized as a dual
//! program together with a consistency check for denials and odd loops
//! ([`dualgen`]), and queries are evaluated top-down with coinductive
//! loop handling against the combined program ([`engine`]).  Numeric
//! constraints are solved exactly over the rationals and Herbrand
//! disequalities are tracked as pending obligations ([`clpq`]).
//!
//! ```
//! use ecscasp::{engine, syntax};
//!
//! let program = syntax::parse_program("p(X) :- X .>. 5.").unwrap();
//! let compiled = engine::compile(&program).unwrap();
//! let query = syntax::parse_query("?- not p(A).").unwrap();
//! let answers = engine::solve_all(&compiled, &query, &engine::SolveOpts::default()).unwrap();
//! assert_eq!(answers.len(), 1); // not p(A) holds exactly when A =< 5
//! ```

pub mod clpq;
pub mod dualgen;
pub mod ec;
pub mod engine;
pub mod rat;
pub mod render;
pub mod syntax;

pub mod cli;

pub use engine::{compile, solve, solve_all, Answer, SolveOpts};
pub use rat::Rat;
pub use syntax::{parse_program, parse_query, Program};
