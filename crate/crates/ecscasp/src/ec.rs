//! The event calculus payload: the basic theory as a bundled program
//! and the narrative scenarios, each with its documented queries.
//!
//! The theory is plain program text pulled in through
//! `#include bec_theory.`, keeping the engine itself agnostic of any
//! particular axiomatization.  Narratives describe events (`happens`),
//! effects (`initiates`/`terminates`), release from inertia
//! (`releases`), and continuous change (`trajectory`); fluents hold at
//! exact rational time points.

use std::path::{Path, PathBuf};

use crate::syntax::{parse_program_with_includes, FileResolver, ParseError, Program};

/// The basic event calculus theory: when a fluent starts or stops
/// holding between two time points, and how truth at a time point
/// follows from initial state, events, and trajectories.  The final
/// denial keeps explicit falsity and truth of a fluent mutually
/// exclusive.
pub const BEC_THEORY: &str = "\
% Basic event calculus theory.

stoppedIn(T1,F,T2) :-
    T1.<.T, T.<.T2,
    terminates(E,F,T),
    happens(E,T).
stoppedIn(T1,F,T2) :-
    T1.<.T, T.<.T2,
    releases(E,F,T),
    happens(E,T).

startedIn(T1,F,T2) :-
    T1.<.T, T.<.T2,
    initiates(E,F,T),
    happens(E,T).
startedIn(T1,F,T2) :-
    T1.<.T, T.<.T2,
    releases(E,F,T),
    happens(E,T).

holdsAt(F2,T2) :-
    initiates(E,F1,T1),
    happens(E,T1),
    trajectory(F1,T1,F2,T2),
    not stoppedIn(T1,F1,T2).

holdsAt(F,T) :-
    0.<.T,
    initiallyP(F),
    not stoppedIn(0,F,T).

-holdsAt(F,T) :-
    0.<.T,
    initiallyN(F),
    not startedIn(0,F,T).

holdsAt(F,T2) :-
    T1.<.T2,
    initiates(E,F,T1),
    happens(E,T1),
    not stoppedIn(T1,F,T2).

-holdsAt(F,T2) :-
    T1.<.T2,
    terminates(E,F,T1),
    happens(E,T1),
    not startedIn(T1,F,T2).

:- -holdsAt(F,T), holdsAt(F,T).
";

/// A two-color bulb: turned on at 2 and 5, off at 4; red for the first
/// second after switch-on, green afterwards; color released from
/// inertia while the lamp is on.
pub const LIGHT_NARRATIVE: &str = "\
#include bec_theory.

happens(turn_on, 2).
happens(turn_off, 4).
happens(turn_on, 5).

initiates(turn_on, on, T).

terminates(turn_off, on, T).
terminates(turn_off, red, T).
terminates(turn_off, green, T).

trajectory(on, T1, red, T2) :-
    T1.<.T2,
    T2.<.T1+1.
trajectory(on, T1, green, T2) :-
    T2.>=.T1+1.

releases(turn_on, red, T).
releases(turn_on, green, T).
";

/// The light narrative plus the state constraint that the lamp is never
/// red and green at the same instant.
pub const LIGHT_CONSTRAINED_NARRATIVE: &str = "\
#include light.

:- holdsAt(red,T), holdsAt(green,T).
";

/// A water tap filling a vessel of capacity 10 or 16 (an even loop
/// splits the worlds) at rate 4/3; the level is released from inertia
/// while filling, and spilling starts when the rim is reached.
pub const WATERTAP_NARRATIVE: &str = "\
#include bec_theory.

#show happens/2, holdsAt/2, -holdsAt/2, initiallyP/1.

max_level(10) :- not max_level(16).
max_level(16) :- not max_level(10).

initiallyP(level(0)).

happens(overflow,T).
happens(tapOn,5).

initiates(tapOn,filling,T).
terminates(tapOff,filling,T).
initiates(overflow,spilling,T) :-
    max_level(Max),
    holdsAt(level(Max), T).

releases(tapOn,level(0),T) :-
    happens(tapOn,T).

trajectory(filling,T1,level(X2),T2) :-
    T1.<.T2,
    X2 .=. X+4/3*(T2-T1),
    max_level(Max),
    X2.=<.Max,
    holdsAt(level(X),T1).
trajectory(filling,T1,overlimit,T2) :-
    T1.<.T2,
    X2 .=. X+4/3*(T2-T1),
    max_level(Max),
    X2.>.Max,
    holdsAt(level(X),T1).

trajectory(spilling,T1,leak(X),T2) :-
    holdsAt(filling, T2),
    T1.<.T2,
    X .=. 4/3*(T2-T1).
";

/// The water-tap narrative with the tap-on event abducible: one world
/// opens the tap at 5, the other leaves it closed.
pub const WATERTAP_ABDUCIBLE_NARRATIVE: &str = "\
#include watertap_abducible_base.
";

/// Optional level-uniqueness constraint, deliberately not part of the
/// shipped narrative: a careful reading shows the level is already
/// unique, and the denial would only mask narrative bugs.
pub const LEVEL_UNIQUE_DENIAL: &str = "\
:- holdsAt(level(X1),T), holdsAt(level(X2),T), X1 .\\=. X2.
";

/// `#abducible happens(tapOn,5).` replaces the plain fact in the
/// abducible variant, so the base text is spliced rather than included.
fn watertap_abducible_text() -> String {
    WATERTAP_NARRATIVE.replace("happens(tapOn,5).", "#abducible happens(tapOn,5).")
}

/// Resolves the bundled program names; unknown names fall through to
/// the file system relative to the including file.
pub struct BundledResolver;

impl FileResolver for BundledResolver {
    fn resolve(&self, name: &str, from: Option<&Path>) -> Result<(String, Option<PathBuf>), String> {
        match name {
            "bec_theory" => Ok((BEC_THEORY.to_string(), None)),
            "light" => Ok((LIGHT_NARRATIVE.to_string(), None)),
            "watertap" => Ok((WATERTAP_NARRATIVE.to_string(), None)),
            "watertap_abducible_base" => Ok((watertap_abducible_text(), None)),
            _ => {
                let base = from.and_then(|p| p.parent().map(|d| d.to_path_buf()));
                let mut candidates: Vec<PathBuf> = Vec::new();
                let raw = match &base {
                    Some(dir) => dir.join(name),
                    None => PathBuf::from(name),
                };
                candidates.push(raw.clone());
                if raw.extension().is_none() {
                    candidates.push(raw.with_extension("pl"));
                    candidates.push(raw.with_extension("scasp"));
                }
                for cand in &candidates {
                    if let Ok(text) = std::fs::read_to_string(cand) {
                        return Ok((text, Some(cand.clone())));
                    }
                }
                Err(format!("cannot resolve include `{name}`"))
            }
        }
    }
}

/// A named narrative with the queries its documentation promises.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub text: &'static str,
    /// (query, expected answer) pairs usable as documentation and smoke
    /// checks.
    pub queries: &'static [(&'static str, &'static str)],
}

impl Scenario {
    pub fn program(&self) -> Result<Program, ParseError> {
        parse_program_with_includes(self.text, &BundledResolver)
    }
}

/// The basic event calculus theory as a parsed program.
pub fn bec_theory() -> Program {
    parse_program_with_includes(BEC_THEORY, &BundledResolver)
        .expect("the bundled theory parses")
}

pub fn light_scenario() -> Scenario {
    Scenario {
        name: "light",
        text: LIGHT_NARRATIVE,
        queries: &[
            ("?- holdsAt(on,3).", "succeeds: the light is on at 3"),
            ("?- -holdsAt(on,9/2).", "succeeds: the light is off at 4.5"),
            ("?- holdsAt(F,3).", "F = green and F = on"),
            ("?- not holdsAt(on,1).", "succeeds: truth at 1 is underivable"),
            ("?- not -holdsAt(on,1).", "succeeds: falsity at 1 is underivable"),
            ("?- holdsAt(red,T).", "2 < T < 3 and 5 < T < 6"),
        ],
    }
}

pub fn light_constrained_scenario() -> Scenario {
    Scenario {
        name: "light-constrained",
        text: LIGHT_CONSTRAINED_NARRATIVE,
        queries: &[("?- holdsAt(red,T).", "2 < T < 3 and 5 < T < 6, unchanged by the denial")],
    }
}

pub fn water_tap_scenario() -> Scenario {
    Scenario {
        name: "watertap",
        text: WATERTAP_NARRATIVE,
        queries: &[
            ("?- holdsAt(level(H),15/2).", "H = 10/3"),
            ("?- holdsAt(level(10/3),T).", "T = 15/2"),
            ("?- holdsAt(level(11),T).", "T = 53/4, vessel capacity 16"),
            ("?- holdsAt(level(12),14).", "a single model: the tap opens at 5"),
        ],
    }
}

pub fn water_tap_abducible_scenario() -> Scenario {
    Scenario {
        name: "watertap-abducible",
        text: WATERTAP_ABDUCIBLE_NARRATIVE,
        queries: &[(
            "?- holdsAt(level(L),14).",
            "two worlds: L = 12 with the tap opened, L = 0 without",
        )],
    }
}

pub fn scenarios() -> Vec<Scenario> {
    vec![
        light_scenario(),
        light_constrained_scenario(),
        water_tap_scenario(),
        water_tap_abducible_scenario(),
    ]
}

pub fn find_scenario(name: &str) -> Option<Scenario> {
    scenarios().into_iter().find(|s| s.name == name)
}
