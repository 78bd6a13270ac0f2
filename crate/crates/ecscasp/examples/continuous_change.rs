//! Continuous change with exact rational arithmetic: the water level
//! follows `level = 4/3 * elapsed` while the tap is open, and queries
//! about it are answered symbolically with no rounding anywhere.
//!
//! Run with `cargo run --example continuous_change`.

use ecscasp::ec::water_tap_scenario;
use ecscasp::engine::{compile, solve_all, Binding, SolveOpts};
use ecscasp::rat::rat_to_decimal;
use ecscasp::syntax::{parse_query, Term};

fn main() {
    let scenario = water_tap_scenario();
    let compiled = compile(&scenario.program().expect("parses")).expect("compiles");

    // The level at time 15/2 is exactly 10/3: the tap opened at 5, so
    // the level is 4/3 * (15/2 - 5).
    let goals = parse_query("?- holdsAt(level(H),15/2).").unwrap();
    let answers = solve_all(&compiled, &goals, &SolveOpts::default()).unwrap();
    for answer in &answers {
        for b in &answer.bindings {
            if let Binding::Bound(Term::Rat(q)) = &b.value {
                println!(
                    "level at 15/2: {} = {} (decimal {})",
                    b.name,
                    ecscasp::rat::rat_to_string(q),
                    rat_to_decimal(q, 12)
                );
            }
        }
    }

    // The same equation solved for time instead of level.
    for (query, note) in [
        ("?- holdsAt(level(10/3),T).", "when is the level exactly 10/3"),
        ("?- holdsAt(level(11),T).", "when is it 11 (only the size-16 vessel allows this)"),
    ] {
        let goals = parse_query(query).unwrap();
        let answers = solve_all(&compiled, &goals, &SolveOpts::default()).unwrap();
        println!("\n{note}:");
        for answer in &answers {
            for b in &answer.bindings {
                if let Binding::Bound(Term::Rat(q)) = &b.value {
                    println!("  {} = {}", b.name, ecscasp::rat::rat_to_string(q));
                }
            }
            let worlds: Vec<String> = answer
                .model
                .iter()
                .filter(|m| !m.naf && m.atom.indicator() == Some(("max_level", 1)))
                .map(|m| m.atom.to_string())
                .collect();
            if !worlds.is_empty() {
                println!("    in the world with {}", worlds.join(", "));
            }
        }
    }
}
