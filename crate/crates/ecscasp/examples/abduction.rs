//! Abduction: which events must (and must not) happen for the water to
//! reach level 12 at time 14?  The answer is a timed plan: the tap has
//! to open at 5, must not open earlier, and must not close before 14 --
//! time windows carried as constraints, not enumerated points.
//!
//! The second half marks the tap event abducible, which splits the
//! narrative into a world where the tap opens and one where it stays
//! closed.
//!
//! Run with `cargo run --example abduction`.

use ecscasp::ec::{water_tap_abducible_scenario, water_tap_scenario};
use ecscasp::engine::{compile, solve_all, SolveOpts};
use ecscasp::render::{render_answer_text, RenderOpts};
use ecscasp::syntax::parse_query;

fn main() {
    let compiled =
        compile(&water_tap_scenario().program().expect("parses")).expect("compiles");
    let goals = parse_query("?- holdsAt(level(12),14).").unwrap();
    let answers = solve_all(&compiled, &goals, &SolveOpts::default()).unwrap();
    println!("plan for level 12 at time 14 ({} model):", answers.len());
    for answer in &answers {
        // The narrative's #show directives restrict the printed model to
        // the event and state literals: the timed plan.
        println!("{}", render_answer_text(answer, &compiled, RenderOpts::default()));
    }

    println!("\nwith the tap event abducible:");
    let compiled =
        compile(&water_tap_abducible_scenario().program().expect("parses")).expect("compiles");
    let goals = parse_query("?- holdsAt(level(L),14).").unwrap();
    let answers = solve_all(&compiled, &goals, &SolveOpts::default()).unwrap();
    for (i, answer) in answers.iter().enumerate() {
        println!("world {}:", i + 1);
        println!("{}", render_answer_text(answer, &compiled, RenderOpts::default()));
        println!();
    }
}
