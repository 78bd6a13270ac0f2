//! Shared test machinery: a brute-force stable-model oracle for
//! finitely-groundable programs, plus helpers for comparing engine
//! answers against it.
//!
//! The oracle is deliberately independent of the evaluation pipeline: it
//! grounds over the program's constant universe, enumerates candidate
//! interpretations, and checks each with the reduct construction.

// Each integration test binary compiles this module; not all of them
// use every helper.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use ecscasp::engine::{compile, solve_all, Answer, SolveOpts};
use ecscasp::rat::Rat;
use ecscasp::syntax::{
    parse_program, parse_query, BodyItem, ConstraintAtom, NumOp, Program, Term,
};

/// A ground literal in oracle form: classical polarity and the printed
/// atom.
pub type GroundAtom = String;

pub fn ground_atom(classical: bool, atom: &Term) -> GroundAtom {
    format!("{}{}", if classical { "-" } else { "" }, atom)
}

#[derive(Clone, Debug)]
struct GroundRule {
    head: Option<GroundAtom>,
    pos: Vec<GroundAtom>,
    neg: Vec<GroundAtom>,
}

fn constants_of_term(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Const(_) | Term::Rat(_) => {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
        Term::Compound(_, args) => {
            for a in args {
                constants_of_term(a, out);
            }
        }
        Term::Var(_) => {}
    }
}

/// The constant universe of a program (flat constants and numbers).
fn universe(program: &Program) -> Vec<Term> {
    let mut out = Vec::new();
    for rule in &program.rules {
        if let Some(h) = &rule.head {
            constants_of_term(&h.atom, &mut out);
        }
        for item in &rule.body {
            match item {
                BodyItem::Lit(l) => constants_of_term(&l.atom, &mut out),
                BodyItem::Con(ConstraintAtom::Herb { lhs, rhs, .. }) => {
                    constants_of_term(lhs, &mut out);
                    constants_of_term(rhs, &mut out);
                }
                BodyItem::Con(ConstraintAtom::Num { .. }) => {}
                BodyItem::Forall { .. } => {}
            }
        }
    }
    if out.is_empty() {
        out.push(Term::Const("u0".to_string()));
    }
    out
}

fn subst_term(t: &Term, env: &HashMap<String, Term>) -> Term {
    match t {
        Term::Var(v) => env.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Compound(f, args) => {
            Term::Compound(f.clone(), args.iter().map(|a| subst_term(a, env)).collect())
        }
        other => other.clone(),
    }
}

fn eval_ground_constraint(c: &ConstraintAtom, env: &HashMap<String, Term>) -> Option<bool> {
    match c {
        ConstraintAtom::Herb { eq, lhs, rhs } => {
            let l = subst_term(lhs, env);
            let r = subst_term(rhs, env);
            Some(if *eq { l == r } else { l != r })
        }
        ConstraintAtom::Num { op, lhs, rhs } => {
            let eval = |e: &ecscasp::syntax::LinExpr| -> Option<Rat> {
                let mut acc = e.constant.clone();
                for (v, coeff) in &e.terms {
                    match env.get(v) {
                        Some(Term::Rat(q)) => acc += coeff * q,
                        _ => return None,
                    }
                }
                Some(acc)
            };
            let l = eval(lhs)?;
            let r = eval(rhs)?;
            Some(match op {
                NumOp::Lt => l < r,
                NumOp::Gt => l > r,
                NumOp::Le => l <= r,
                NumOp::Ge => l >= r,
                NumOp::Eq => l == r,
                NumOp::Ne => l != r,
            })
        }
    }
}

/// Ground every rule over the universe, evaluating constraint atoms on
/// the way; instances whose constraints are false are dropped.
fn ground_program(program: &Program) -> Vec<GroundRule> {
    let universe = universe(program);
    let mut out = Vec::new();
    for rule in &program.rules {
        let vars = rule.vars();
        let mut env: HashMap<String, Term> = HashMap::new();
        ground_rule(rule, &vars, 0, &universe, &mut env, &mut out);
    }
    out
}

fn ground_rule(
    rule: &ecscasp::syntax::Rule,
    vars: &[String],
    i: usize,
    universe: &[Term],
    env: &mut HashMap<String, Term>,
    out: &mut Vec<GroundRule>,
) {
    if i == vars.len() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for item in &rule.body {
            match item {
                BodyItem::Lit(l) => {
                    let atom = ground_atom(l.classical, &subst_term(&l.atom, env));
                    if l.naf {
                        neg.push(atom);
                    } else {
                        pos.push(atom);
                    }
                }
                BodyItem::Con(c) => match eval_ground_constraint(c, env) {
                    Some(true) => {}
                    Some(false) | None => return,
                },
                BodyItem::Forall { .. } => panic!("oracle programs have no forall wrappers"),
            }
        }
        let head = rule.head.as_ref().map(|h| ground_atom(h.classical, &subst_term(&h.atom, env)));
        out.push(GroundRule { head, pos, neg });
        return;
    }
    for value in universe {
        env.insert(vars[i].clone(), value.clone());
        ground_rule(rule, vars, i + 1, universe, env, out);
    }
    env.remove(&vars[i]);
}

fn least_model(rules: &[&GroundRule]) -> BTreeSet<GroundAtom> {
    let mut model = BTreeSet::new();
    loop {
        let mut changed = false;
        for rule in rules {
            let Some(head) = &rule.head else { continue };
            if model.contains(head) {
                continue;
            }
            if rule.pos.iter().all(|a| model.contains(a)) {
                model.insert(head.clone());
                changed = true;
            }
        }
        if !changed {
            return model;
        }
    }
}

/// All stable models of a finitely-groundable program, as sets of ground
/// atoms.  Classical negation is handled by treating `-p` atoms as their
/// own predicates and discarding interpretations containing an atom and
/// its classical negation.
pub fn stable_models(program: &Program) -> Vec<BTreeSet<GroundAtom>> {
    let ground = ground_program(program);
    let mut atoms: Vec<GroundAtom> = Vec::new();
    for rule in &ground {
        for a in rule.head.iter().chain(rule.pos.iter()).chain(rule.neg.iter()) {
            if !atoms.contains(a) {
                atoms.push(a.clone());
            }
        }
    }
    assert!(
        atoms.len() <= 20,
        "oracle program too large: {} ground atoms",
        atoms.len()
    );

    let mut models = Vec::new();
    for mask in 0u32..(1 << atoms.len()) {
        let candidate: BTreeSet<GroundAtom> = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect();
        // classical consistency
        let inconsistent = candidate
            .iter()
            .any(|a| !a.starts_with('-') && candidate.contains(&format!("-{a}")));
        if inconsistent {
            continue;
        }
        // denials
        let violates = ground.iter().filter(|r| r.head.is_none()).any(|r| {
            r.pos.iter().all(|a| candidate.contains(a))
                && r.neg.iter().all(|a| !candidate.contains(a))
        });
        if violates {
            continue;
        }
        // Gelfond-Lifschitz reduct
        let reduct: Vec<&GroundRule> = ground
            .iter()
            .filter(|r| r.head.is_some() && r.neg.iter().all(|a| !candidate.contains(a)))
            .collect();
        if least_model(&reduct) == candidate {
            models.push(candidate);
        }
    }
    models
}

/// Does a model satisfy a ground query (conjunction of literals)?
pub fn model_satisfies(model: &BTreeSet<GroundAtom>, query: &[BodyItem]) -> bool {
    query.iter().all(|item| match item {
        BodyItem::Lit(l) => {
            let atom = ground_atom(l.classical, &l.atom);
            if l.naf {
                !model.contains(&atom)
            } else {
                model.contains(&atom)
            }
        }
        BodyItem::Con(_) => panic!("oracle queries are constraint-free"),
        BodyItem::Forall { .. } => unreachable!(),
    })
}

/// The literals of an engine answer in oracle form, split into the ones
/// asserted and the ones assumed absent.  A literal with free variables
/// holds throughout its constraint region, so it expands to every
/// universe instance satisfying the constraints.
pub fn answer_atoms(answer: &Answer, universe: &[Term]) -> (Vec<GroundAtom>, Vec<GroundAtom>) {
    let mut present = Vec::new();
    let mut absent = Vec::new();
    for lit in &answer.model {
        let vars = lit.atom.vars();
        let instances: Vec<Term> = if vars.is_empty() {
            vec![lit.atom.clone()]
        } else {
            let mut out = Vec::new();
            let mut assign: HashMap<String, Term> = HashMap::new();
            expand_instances(&lit.atom, &lit.constraints, &vars, 0, universe, &mut assign, &mut out);
            out
        };
        for atom in instances {
            let key = ground_atom(lit.classical, &atom);
            if lit.naf {
                absent.push(key);
            } else {
                present.push(key);
            }
        }
    }
    (present, absent)
}

fn expand_instances(
    atom: &Term,
    constraints: &[ConstraintAtom],
    vars: &[String],
    i: usize,
    universe: &[Term],
    assign: &mut HashMap<String, Term>,
    out: &mut Vec<Term>,
) {
    if i == vars.len() {
        // the instance counts only when it satisfies the constraints
        let mut store = ecscasp::clpq::Store::new();
        for c in constraints {
            if !store.add_constraint(c) {
                return;
            }
        }
        for (v, t) in assign.iter() {
            if !store.unify(&Term::Var(v.clone()), t) {
                return;
            }
        }
        out.push(subst_term(atom, assign));
        return;
    }
    for value in universe {
        assign.insert(vars[i].clone(), value.clone());
        expand_instances(atom, constraints, vars, i + 1, universe, assign, out);
    }
    assign.remove(&vars[i]);
}

/// Engine answers and oracle models must agree in both directions: the
/// query succeeds iff some stable model satisfies it, every answer
/// extends to a stable model, and every satisfying stable model is
/// reachable through some answer.
pub fn assert_oracle_agreement(name: &str, source: &str, queries: &[&str]) {
    let program = parse_program(source).unwrap_or_else(|e| panic!("{name}: parse: {e}"));
    let models = stable_models(&program);
    let compiled = compile(&program).unwrap_or_else(|e| panic!("{name}: compile: {e}"));
    let universe = universe(&program);

    for query_text in queries {
        let query = parse_query(query_text).unwrap();
        let answers = solve_all(&compiled, &query, &SolveOpts::default())
            .unwrap_or_else(|e| panic!("{name}: {query_text}: {e}"));
        let satisfying: Vec<&BTreeSet<GroundAtom>> =
            models.iter().filter(|m| model_satisfies(m, &query)).collect();

        assert_eq!(
            !answers.is_empty(),
            !satisfying.is_empty(),
            "{name}: {query_text}: engine gave {} answers, oracle has {} satisfying models \
             (of {:?})",
            answers.len(),
            satisfying.len(),
            models,
        );

        // every answer extends to some oracle model
        for answer in &answers {
            let (present, absent) = answer_atoms(answer, &universe);
            let extends = models.iter().any(|m| {
                present.iter().all(|a| m.contains(a)) && absent.iter().all(|a| !m.contains(a))
            });
            assert!(
                extends,
                "{name}: {query_text}: answer (present {present:?}, absent {absent:?}) \
                 does not extend to any stable model of {models:?}"
            );
        }

        // every satisfying oracle model is reachable through some answer
        for m in &satisfying {
            let reachable = answers.iter().any(|answer| {
                let (present, absent) = answer_atoms(answer, &universe);
                present.iter().all(|a| m.contains(a)) && absent.iter().all(|a| !m.contains(a))
            });
            assert!(
                reachable,
                "{name}: {query_text}: stable model {m:?} not reachable through any answer"
            );
        }
    }
}

/// Every ground atom of the program's (tiny) ground atom space, posed
/// positively and under default negation - a query battery that covers
/// both directions of the oracle comparison.
pub fn full_query_battery(source: &str) -> Vec<String> {
    let program = parse_program(source).unwrap();
    let ground = ground_program(&program);
    let mut atoms: Vec<GroundAtom> = Vec::new();
    for rule in &ground {
        for a in rule.head.iter().chain(rule.pos.iter()).chain(rule.neg.iter()) {
            if !atoms.contains(a) {
                atoms.push(a.clone());
            }
        }
    }
    let mut queries = Vec::new();
    for atom in atoms {
        queries.push(format!("?- {atom}."));
        queries.push(format!("?- not {atom}."));
    }
    queries
}

/// Scratch-store check that two constraint sets over the same variable
/// describe the same solution set.
pub fn same_solution_set(
    a: &[ConstraintAtom],
    b: &[ConstraintAtom],
) -> bool {
    let mut store_a = ecscasp::clpq::Store::new();
    for c in a {
        if !store_a.add_constraint(c) {
            return false;
        }
    }
    let mut store_b = ecscasp::clpq::Store::new();
    for c in b {
        if !store_b.add_constraint(c) {
            return false;
        }
    }
    a.iter().all(|c| store_b.entails(c)) && b.iter().all(|c| store_a.entails(c))
}

/// No answer may contain an atom together with its classical negation
/// on an overlapping solution set.
pub fn assert_classically_consistent(answer: &Answer) {
    for lit in &answer.model {
        if lit.naf || !lit.classical {
            continue;
        }
        for other in &answer.model {
            if other.naf || other.classical {
                continue;
            }
            if other.atom.indicator() != lit.atom.indicator() {
                continue;
            }
            // can the two atoms denote the same instance under their
            // constraints?
            let mut store = ecscasp::clpq::Store::new();
            for c in lit.constraints.iter().chain(other.constraints.iter()) {
                if !store.add_constraint(c) {
                    return;
                }
            }
            assert!(
                !store.unify(&lit.atom, &other.atom),
                "answer contains -{} and {} with overlapping solutions",
                lit.atom,
                other.atom
            );
        }
    }
}

/// Render an answer literal compactly for set comparisons in tests.
pub fn lit_key(lit: &ecscasp::engine::ModelLit) -> String {
    format!(
        "{}{}{}",
        if lit.naf { "not " } else { "" },
        if lit.classical { "-" } else { "" },
        lit.atom
    )
}

