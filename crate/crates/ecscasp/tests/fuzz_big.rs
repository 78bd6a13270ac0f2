//! Heavier random-program fuzzing against the stable-model oracle:
//! more atoms, more rules, and denials in the mix.  Run with a larger
//! PROPTEST_CASES for a deeper sweep.

mod common;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]
    #[test]
    fn big_random_programs(
        rules in prop::collection::vec(
            (0usize..5, prop::collection::vec((0usize..5, any::<bool>()), 0..4)),
            1..9,
        ),
        denials in prop::collection::vec(prop::collection::vec((0usize..5, any::<bool>()), 1..3), 0..3),
    ) {
        let atom = |i: usize| ["a", "b", "c", "d", "e"][i];
        let mut text = String::new();
        for (head, body) in &rules {
            text.push_str(atom(*head));
            if !body.is_empty() {
                text.push_str(" :- ");
                let parts: Vec<String> = body.iter()
                    .map(|(i, naf)| format!("{}{}", if *naf { "not " } else { "" }, atom(*i)))
                    .collect();
                text.push_str(&parts.join(", "));
            }
            text.push_str(".\n");
        }
        for body in &denials {
            text.push_str(":- ");
            let parts: Vec<String> = body.iter()
                .map(|(i, naf)| format!("{}{}", if *naf { "not " } else { "" }, atom(*i)))
                .collect();
            text.push_str(&parts.join(", "));
            text.push_str(".\n");
        }
        let queries: Vec<String> = (0..5)
            .flat_map(|i| [format!("?- {}.", atom(i)), format!("?- not {}.", atom(i))])
            .collect();
        let refs: Vec<&str> = queries.iter().map(|s| s.as_str()).collect();
        common::assert_oracle_agreement("big_random", &text, &refs);
    }

    /// Random programs over unary predicates with variables: heads are
    /// guarded by a domain predicate so answers stay ground, and every
    /// negated body literal exercises the dual-with-forall machinery.
    #[test]
    fn random_first_order_programs(
        rules in prop::collection::vec(
            (
                0usize..3,                 // head predicate
                0usize..3,                 // head argument: X, a, b
                prop::collection::vec((0usize..3, 0usize..3, any::<bool>()), 0..3),
            ),
            1..6,
        ),
    ) {
        let pred = |i: usize| ["p", "q", "r"][i];
        let arg = |i: usize| ["X", "a", "b"][i];
        let mut text = String::from("d(a).\nd(b).\n");
        for (head, harg, body) in &rules {
            let uses_var = *harg == 0 || body.iter().any(|(_, a, _)| *a == 0);
            text.push_str(&format!("{}({})", pred(*head), arg(*harg)));
            let mut parts: Vec<String> = Vec::new();
            if uses_var {
                parts.push("d(X)".to_string());
            }
            for (p, a, naf) in body {
                parts.push(format!(
                    "{}{}({})",
                    if *naf { "not " } else { "" },
                    pred(*p),
                    arg(*a)
                ));
            }
            if !parts.is_empty() {
                text.push_str(" :- ");
                text.push_str(&parts.join(", "));
            }
            text.push_str(".\n");
        }
        let mut queries = Vec::new();
        for p in 0..3 {
            for a in 1..3 {
                queries.push(format!("?- {}({}).", pred(p), arg(a)));
                queries.push(format!("?- not {}({}).", pred(p), arg(a)));
            }
        }
        let refs: Vec<&str> = queries.iter().map(|s| s.as_str()).collect();
        common::assert_oracle_agreement("first_order", &text, &refs);
    }

    /// Rules guarded by small numeric constraints over a numeric domain:
    /// dual synthesis must negate the guards correctly and the forall
    /// carving must cover the domain regions.
    #[test]
    fn random_constraint_guarded_programs(
        rules in prop::collection::vec(
            (
                0usize..2,                      // head predicate
                prop::sample::select(vec![".<.", ".>.", ".=<.", ".>=."]),
                1i64..4,                        // bound
                prop::collection::vec((0usize..2, any::<bool>()), 0..2),
            ),
            1..5,
        ),
    ) {
        let pred = |i: usize| ["p", "q"][i];
        let mut text = String::from("d(1).\nd(2).\nd(3).\n");
        for (head, op, bound, body) in &rules {
            text.push_str(&format!("{}(X) :- d(X), X {} {}", pred(*head), op, bound));
            for (p, naf) in body {
                text.push_str(&format!(", {}{}(X)", if *naf { "not " } else { "" }, pred(*p)));
            }
            text.push_str(".\n");
        }
        let mut queries = Vec::new();
        for p in 0..2 {
            for v in 1..=3 {
                queries.push(format!("?- {}({}).", pred(p), v));
                queries.push(format!("?- not {}({}).", pred(p), v));
            }
        }
        let refs: Vec<&str> = queries.iter().map(|s| s.as_str()).collect();
        common::assert_oracle_agreement("constraint_guarded", &text, &refs);
    }
}
