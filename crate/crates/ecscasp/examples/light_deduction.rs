//! Deduction over the two-color lamp narrative: truth and explicit
//! falsity of fluents at exact time points, and the symbolic time
//! windows in which the lamp shines red.
//!
//! Run with `cargo run --example light_deduction`.

use ecscasp::ec::light_scenario;
use ecscasp::engine::{compile, solve_all, SolveOpts};
use ecscasp::render::{render_answer_text, RenderOpts};
use ecscasp::syntax::parse_query;

fn main() {
    let scenario = light_scenario();
    let program = scenario.program().expect("bundled narrative parses");
    let compiled = compile(&program).expect("narrative compiles");

    for (query, expectation) in scenario.queries {
        println!("{query}   % {expectation}");
        let goals = parse_query(query).expect("query parses");
        let answers = solve_all(&compiled, &goals, &SolveOpts::default()).expect("no limits hit");
        if answers.is_empty() {
            println!("  no models");
        }
        for answer in &answers {
            let text = render_answer_text(answer, &compiled, RenderOpts::default());
            for line in text.lines() {
                println!("  {line}");
            }
        }
        println!();
    }
}
