//! Constructive negation: `not p(X)` answers with the constraints on
//! `X` under which `p(X)` has no proof, instead of just failing or
//! succeeding.
//!
//! Run with `cargo run --example constructive_negation`.

use ecscasp::engine::{compile, solve_all, SolveOpts};
use ecscasp::render::{render_answer_text, RenderOpts};
use ecscasp::syntax::{parse_program, parse_query};

fn show(src: &str, query: &str) {
    println!("program:");
    for line in src.lines() {
        println!("  {line}");
    }
    println!("query: {query}");
    let compiled = compile(&parse_program(src).unwrap()).unwrap();
    let answers =
        solve_all(&compiled, &parse_query(query).unwrap(), &SolveOpts::default()).unwrap();
    for answer in &answers {
        for line in render_answer_text(answer, &compiled, RenderOpts::default()).lines() {
            println!("  {line}");
        }
        println!();
    }
    if answers.is_empty() {
        println!("  no models\n");
    }
}

fn main() {
    // Negating a fact yields a disequality; negating a constrained rule
    // yields the complement constraint.
    show("p(a).", "?- not p(X).");
    show("p(X) :- X .>. 0.", "?- not p(X).");

    // A query variable occurring only under negation still gets an
    // answer, one per disjoint region of the negation's complement.
    show(
        "p(X):- q(X, Z), not r(X).\n\
         p(Z):- not q(X, Z), r(X).\n\
         q(X, a):- X .>. 5.\n\
         r(X):- X .<. 1.",
        "?- p(A).",
    );

    // Uninterpreted functions work like in ordinary logic programming:
    // not being a member of a list means differing from every element.
    show(
        "member(X, [X|Xs]).\n\
         member(X, [_|Xs]):- member(X, Xs).\n\
         list([1,2,3,4,5]).",
        "?- list(A), not member(B, A).",
    );

    // The answer can be more general than any finitely-ground reading.
    show("d(1).\np(X) :- not d(X).", "?- p(X).");
}
