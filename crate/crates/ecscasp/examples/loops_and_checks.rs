//! Loop semantics and the consistency check: even negation loops split
//! the program into alternative worlds, odd loops poison candidate
//! models, and denials discard candidates that violate them.
//!
//! Run with `cargo run --example loops_and_checks`.

use ecscasp::engine::{compile, solve_all, SolveOpts};
use ecscasp::render::{render_answer_text, RenderOpts};
use ecscasp::syntax::{parse_program, parse_query};

fn report(title: &str, src: &str, queries: &[&str]) {
    println!("== {title}");
    for line in src.lines() {
        println!("  {line}");
    }
    for query in queries {
        let compiled = compile(&parse_program(src).unwrap()).unwrap();
        let answers =
            solve_all(&compiled, &parse_query(query).unwrap(), &SolveOpts::default()).unwrap();
        println!("{query}");
        if answers.is_empty() {
            println!("    no models");
        }
        for answer in &answers {
            for line in render_answer_text(answer, &compiled, RenderOpts::default()).lines() {
                println!("    {line}");
            }
        }
    }
    println!();
}

fn main() {
    report(
        "even loop: two worlds",
        "p :- not q.\nq :- r.\nr :- not p.",
        &["?- p.", "?- q."],
    );
    report(
        "odd loop: the call fails",
        "p :- q.\nq :- not r.\nr :- p.",
        &["?- p."],
    );
    report(
        "an odd loop anywhere poisons every query",
        "p :- not q.\nq :- not p.\nr :- not r.",
        &["?- p.", "?- q."],
    );
    report(
        "denials discard candidate worlds",
        "p :- not q.\nq :- not p.\n:- p.",
        &["?- q.", "?- p."],
    );
}
