//! Narrative-level invariants of the bundled scenarios: consistency of
//! truth and explicit falsity, uniqueness of the water level within a
//! world, and the effect of state-constraint denials.

mod common;

use std::collections::BTreeSet;

use common::lit_key;
use ecscasp::ec;
use ecscasp::engine::{compile, solve_all, Answer, Binding, Compiled, SolveOpts};
use ecscasp::rat::rat_to_string;
use ecscasp::syntax::{parse_program_with_includes, parse_query, Term};

fn answers(compiled: &Compiled, query: &str) -> Vec<Answer> {
    solve_all(compiled, &parse_query(query).unwrap(), &SolveOpts::default()).unwrap()
}

fn scenario(name: &str) -> Compiled {
    compile(&ec::find_scenario(name).unwrap().program().unwrap()).unwrap()
}

#[test]
fn documented_queries_behave_as_promised() {
    for s in ec::scenarios() {
        let compiled = compile(&s.program().unwrap()).unwrap();
        for (query, note) in s.queries {
            let n = answers(&compiled, query).len();
            assert!(n > 0, "{}: {query} ({note}) found no models", s.name);
        }
    }
}

#[test]
fn truth_and_falsity_never_coincide() {
    let compiled = scenario("light");
    let fluents = ["on", "red", "green"];
    let times = ["1", "2", "3", "9/2", "5", "11/2", "7"];
    for f in fluents {
        for t in times {
            let holds = !answers(&compiled, &format!("?- holdsAt({f},{t}).")).is_empty();
            let fails = !answers(&compiled, &format!("?- -holdsAt({f},{t}).")).is_empty();
            assert!(
                !(holds && fails),
                "holdsAt({f},{t}) and -holdsAt({f},{t}) both derivable"
            );
        }
    }
}

#[test]
fn water_level_unique_within_a_world() {
    let compiled = scenario("watertap");
    for t in ["0", "5", "6", "15/2", "10", "53/4", "14"] {
        let answers = answers(&compiled, &format!("?- holdsAt(level(H),{t})."));
        // group levels by the world's vessel capacity
        let mut by_world: std::collections::HashMap<String, BTreeSet<String>> =
            std::collections::HashMap::new();
        for a in &answers {
            let world = a
                .model
                .iter()
                .find(|m| !m.naf && m.atom.indicator() == Some(("max_level", 1)))
                .map(|m| m.atom.to_string())
                .unwrap_or_else(|| "any".to_string());
            let level = match &a.bindings[0].value {
                Binding::Bound(Term::Rat(q)) => rat_to_string(q),
                other => panic!("level not pinned at t={t}: {other:?}"),
            };
            by_world.entry(world).or_default().insert(level);
        }
        for (world, levels) in by_world {
            assert!(
                levels.len() <= 1,
                "t={t}: world {world} admits several levels: {levels:?}"
            );
        }
    }
}

#[test]
fn state_constraint_changes_nothing_on_the_sound_narrative() {
    let base = scenario("light");
    let constrained = scenario("light-constrained");
    for query in ["?- holdsAt(red,T).", "?- holdsAt(on,3).", "?- -holdsAt(on,9/2)."] {
        let a = answers(&base, query);
        let b = answers(&constrained, query);
        assert_eq!(a.len(), b.len(), "{query}: the denial changed the answer count");
        for (x, y) in a.iter().zip(b.iter()) {
            let keys = |ans: &Answer| -> BTreeSet<String> {
                ans.model.iter().map(lit_key).collect()
            };
            assert_eq!(keys(x), keys(y), "{query}: the denial changed a model");
        }
    }
}

#[test]
fn widened_trajectory_violates_the_state_constraint() {
    // With the red window closed at t1+1 instead of open, red and green
    // overlap at exactly t1+1 and the constrained narrative loses all
    // its models.
    let widened = ec::LIGHT_NARRATIVE.replace("T2.<.T1+1", "T2.=<.T1+1");
    let text = format!("{widened}\n:- holdsAt(red,T), holdsAt(green,T).\n");
    let program = parse_program_with_includes(&text, &ec::BundledResolver).unwrap();
    let compiled = compile(&program).unwrap();
    for query in ["?- holdsAt(red,T).", "?- holdsAt(on,3)."] {
        assert!(
            answers(&compiled, query).is_empty(),
            "{query}: expected no valid models under the violated constraint"
        );
    }
    // sanity: without the denial the widened narrative still answers
    let program = parse_program_with_includes(&widened, &ec::BundledResolver).unwrap();
    let compiled = compile(&program).unwrap();
    assert!(!answers(&compiled, "?- holdsAt(on,3).").is_empty());
}

#[test]
fn optional_level_uniqueness_denial_compiles() {
    // The optional uniqueness constraint is shipped but not part of the
    // narrative: checking it quantifies constructively over two dense
    // variables at once, which is outside the engine's practical
    // envelope.  The narrative-level uniqueness test above covers the
    // semantic content; here the optional file must parse and compile.
    let text = format!("{}{}", ec::WATERTAP_NARRATIVE, ec::LEVEL_UNIQUE_DENIAL);
    let program = parse_program_with_includes(&text, &ec::BundledResolver).unwrap();
    let compiled = compile(&program).unwrap();
    assert!(compiled.nmr.check_rules.len() > 2, "the denial contributes check rules");
}

#[test]
fn spilling_starts_at_the_rim() {
    // In the capacity-10 world the vessel fills by 15/2 + ... at t=25/2;
    // spilling holds afterwards.
    let compiled = scenario("watertap");
    let a = answers(&compiled, "?- holdsAt(spilling,13).");
    assert!(
        !a.is_empty(),
        "the size-10 vessel runs over before t=13, so spilling must hold"
    );
    let worlds: BTreeSet<String> = a
        .iter()
        .filter_map(|ans| {
            ans.model
                .iter()
                .find(|m| !m.naf && m.atom.indicator() == Some(("max_level", 1)))
                .map(|m| m.atom.to_string())
        })
        .collect();
    assert!(worlds.contains("max_level(10)"), "{worlds:?}");
}
