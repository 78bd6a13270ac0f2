//! The dual program: constructive definitions of each predicate's
//! default negation, synthesized by completion and De Morgan steps and
//! evaluated in place of negation-as-failure.
//!
//! Run with `cargo run --example dual_program`.

use ecscasp::engine::compile;
use ecscasp::syntax::{parse_program, rule_to_string};

fn main() {
    let src = "p(X):- q(X, Z), not r(X).\n\
               p(Z):- not q(X, Z), r(X).\n\
               q(X, a):- X .>. 5.\n\
               r(X):- X .<. 1.";
    println!("program:");
    for line in src.lines() {
        println!("  {line}");
    }

    let compiled = compile(&parse_program(src).unwrap()).unwrap();
    println!("\ndual:");
    for rule in &compiled.dual_rules {
        println!("  {}", rule_to_string(rule));
    }

    // Body variables local to a clause come out universally quantified;
    // negated constraints flip, and equalities split into strict halves.
    let src = "lvl(X2, T) :- X2 .=. 4/3*T, X2 .=<. 10.";
    println!("\nprogram:");
    for line in src.lines() {
        println!("  {line}");
    }
    let compiled = compile(&parse_program(src).unwrap()).unwrap();
    println!("\ndual:");
    for rule in &compiled.dual_rules {
        println!("  {}", rule_to_string(rule));
    }
}
