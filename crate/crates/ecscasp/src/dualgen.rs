//! Synthesis of the dual program and the global consistency check.
//!
//! For every predicate the dual gives a constructive definition of its
//! default negation: one entry rule `not p(X) :- not p_1(X), ...` plus,
//! per source clause, branch rules that negate the body one element at
//! a time under a positive prefix of the preceding elements.  Body
//! variables local to a clause are universally quantified with `forall`
//! wrappers.  The prefixes keep the branches disjoint, so enumeration
//! order is deterministic and each binding is reported once.
//!
//! The consistency check collects the program's denials, an automatic
//! denial `:- p(X), -p(X)` for every predicate with classical-negation
//! rules, and a check per rule that lies on an odd-parity loop of the
//! dependency graph.  The detection is predicate-level, so it may emit
//! checks that never fire; it never misses one.

use std::collections::HashSet;

use crate::syntax::{BodyItem, Literal, PredKey, Program, Rule, Term};

pub use crate::clpq::negate::negate_constraint;

/// Predicate dependency graph with negation-parity labels on edges.
#[derive(Clone, Debug, Default)]
pub struct DepGraph {
    pub nodes: Vec<PredKey>,
    /// (from-head, to-body-literal, crosses-negation)
    pub edges: Vec<(PredKey, PredKey, bool)>,
}

impl DepGraph {
    fn add_node(&mut self, key: PredKey) {
        if !self.nodes.contains(&key) {
            self.nodes.push(key);
        }
    }

    /// Is `(to, parity)` reachable from `(from, even)`?
    pub fn reaches_with_parity(&self, from: &PredKey, to: &PredKey, odd: bool) -> bool {
        let mut seen: HashSet<(PredKey, bool)> = HashSet::new();
        let mut queue = vec![(from.clone(), false)];
        while let Some((node, parity)) = queue.pop() {
            if !seen.insert((node.clone(), parity)) {
                continue;
            }
            if &node == to && parity == odd {
                return true;
            }
            for (src, dst, neg) in &self.edges {
                if src == &node {
                    queue.push((dst.clone(), parity ^ neg));
                }
            }
        }
        false
    }
}

/// Build the parity-labeled dependency graph of a normalized program.
/// Denials contribute edges from a synthetic per-denial head.
pub fn build_dep_graph(program: &Program) -> DepGraph {
    let mut graph = DepGraph::default();
    for (idx, rule) in program.rules.iter().enumerate() {
        let head_key = match &rule.head {
            Some(h) => h.key(),
            None => PredKey { classical: false, name: format!("_denial_{idx}"), arity: 0 },
        };
        graph.add_node(head_key.clone());
        for item in &rule.body {
            add_edges(&mut graph, &head_key, item);
        }
    }
    graph
}

fn add_edges(graph: &mut DepGraph, head: &PredKey, item: &BodyItem) {
    match item {
        BodyItem::Lit(l) => {
            let key = l.key();
            graph.add_node(key.clone());
            graph.edges.push((head.clone(), key, l.naf));
        }
        BodyItem::Con(_) => {}
        BodyItem::Forall { inner, .. } => add_edges(graph, head, inner),
    }
}

/// Names already taken by the source program; generated predicates must
/// not collide with them.
fn user_names(program: &Program) -> HashSet<String> {
    program.pred_keys().into_iter().map(|k| k.name).collect()
}

fn fresh_name(base: String, taken: &mut HashSet<String>) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('_');
    }
    taken.insert(name.clone());
    name
}

fn fresh_vars(n: usize, counter: &mut u64) -> Vec<Term> {
    (0..n)
        .map(|_| {
            *counter += 1;
            Term::Var(format!("_D{}", counter))
        })
        .collect()
}

/// The branch bodies negating a clause body one element at a time:
/// branch `j` keeps elements `0..j` positively and negates element `j`.
/// Negating a constraint can fan out into one clause per disjunct, `<`
/// before `>`.
fn branch_bodies(body: &[BodyItem]) -> Vec<Vec<BodyItem>> {
    let mut branches = Vec::new();
    for (j, item) in body.iter().enumerate() {
        let prefix: Vec<BodyItem> = body[..j].to_vec();
        match item {
            BodyItem::Lit(l) => {
                let mut b = prefix;
                b.push(BodyItem::Lit(l.negate_default()));
                branches.push(b);
            }
            BodyItem::Con(c) => {
                for disjunct in negate_constraint(c) {
                    let mut b = prefix.clone();
                    b.push(BodyItem::Con(disjunct));
                    branches.push(b);
                }
            }
            BodyItem::Forall { .. } => {
                unreachable!("source bodies never contain forall wrappers")
            }
        }
    }
    branches
}

fn wrap_foralls(locals: &[String], inner: Literal) -> BodyItem {
    let mut item = BodyItem::Lit(inner);
    for var in locals.iter().rev() {
        item = BodyItem::Forall { var: var.clone(), inner: Box::new(item) };
    }
    item
}

/// Synthesize the dual program of a normalized program: for each
/// predicate (defined or merely referenced) a constructive definition of
/// its negation.  Referenced-but-undefined predicates get a dual that
/// unconditionally succeeds.  The returned rules all have
/// default-negated heads; auxiliary per-clause predicates reuse the
/// source predicate name with a `_i` suffix.
pub fn synthesize_dual(program: &Program) -> Vec<Rule> {
    let mut taken = user_names(program);
    let mut counter = 0u64;
    let mut out = Vec::new();
    for key in program.pred_keys() {
        let clauses: Vec<&Rule> = program
            .rules
            .iter()
            .filter(|r| r.head.as_ref().map(|h| h.key() == key).unwrap_or(false))
            .collect();
        let entry_args = fresh_vars(key.arity, &mut counter);
        let entry_head = Literal {
            classical: key.classical,
            naf: true,
            atom: Term::compound(key.name.clone(), entry_args.clone()),
        };
        if clauses.is_empty() {
            // Closed world: nothing can prove it, its negation holds.
            out.push(Rule::new(Some(entry_head), Vec::new()));
            continue;
        }
        let mut entry_body = Vec::new();
        let mut clause_rules = Vec::new();
        for (i, clause) in clauses.iter().enumerate() {
            let aux_name = fresh_name(format!("{}_{}", key.name, i + 1), &mut taken);
            entry_body.push(BodyItem::Lit(Literal {
                classical: key.classical,
                naf: true,
                atom: Term::compound(aux_name.clone(), entry_args.clone()),
            }));
            clause_rules.extend(clause_duals(&key, &aux_name, clause, &mut counter));
        }
        out.push(Rule::new(Some(entry_head), entry_body));
        out.extend(clause_rules);
    }
    out
}

/// Dual rules for one source clause: either direct branch rules, or a
/// forall-wrapped delegation to a wider predicate when the body has
/// clause-local variables.
fn clause_duals(key: &PredKey, aux_name: &str, clause: &Rule, _counter: &mut u64) -> Vec<Rule> {
    let head = clause.head.as_ref().expect("clause has a head");
    let head_vars: Vec<String> = head.atom.vars();
    let head_args: Vec<Term> = head.atom.args().to_vec();
    let mut body_vars: Vec<String> = Vec::new();
    for item in &clause.body {
        item.collect_vars(&mut body_vars);
    }
    let locals: Vec<String> = body_vars.into_iter().filter(|v| !head_vars.contains(v)).collect();

    let mut rules = Vec::new();
    if locals.is_empty() {
        // A fact leaves no branches at all: every call to the auxiliary
        // predicate fails, as a fact's negation must.
        for body in branch_bodies(&clause.body) {
            rules.push(Rule::new(
                Some(Literal {
                    classical: key.classical,
                    naf: true,
                    atom: Term::compound(aux_name.to_string(), head_args.clone()),
                }),
                body,
            ));
        }
    } else {
        let mut wide_args = head_args.clone();
        wide_args.extend(locals.iter().map(|v| Term::Var(v.clone())));
        let inner = Literal {
            classical: key.classical,
            naf: true,
            atom: Term::compound(aux_name.to_string(), wide_args.clone()),
        };
        rules.push(Rule::new(
            Some(Literal {
                classical: key.classical,
                naf: true,
                atom: Term::compound(aux_name.to_string(), head_args.clone()),
            }),
            vec![wrap_foralls(&locals, inner)],
        ));
        for body in branch_bodies(&clause.body) {
            rules.push(Rule::new(
                Some(Literal {
                    classical: key.classical,
                    naf: true,
                    atom: Term::compound(aux_name.to_string(), wide_args.clone()),
                }),
                body,
            ));
        }
    }
    rules
}

/// The synthesized consistency check: per-denial and per-odd-loop rules
/// plus a single entry predicate whose goal is appended to every query.
#[derive(Clone, Debug)]
pub struct NmrCheck {
    /// Dual-style rules (default-negated heads) defining the per-check
    /// predicates.
    pub check_rules: Vec<Rule>,
    /// The positive clause for the entry predicate.
    pub entry_rule: Rule,
    /// Goal to conjoin to every query.
    pub entry: Literal,
}

/// Build the check for the program's denials, the automatic
/// `:- p(X), -p(X)` consistency denials, and statically detected
/// odd-loop rules.
pub fn generate_nmr_check(program: &Program, graph: &DepGraph) -> NmrCheck {
    let mut taken = user_names(program);
    // Keep auxiliary names disjoint from the dual program's.
    for name in synthesize_dual_names(program) {
        taken.insert(name);
    }
    let mut counter = 0u64;
    let mut check_rules = Vec::new();
    let mut entry_body = Vec::new();
    let mut checks = 0usize;

    let add_check = |vars: Vec<String>,
                         branches: Vec<Vec<BodyItem>>,
                         checks: &mut usize,
                         check_rules: &mut Vec<Rule>,
                         entry_body: &mut Vec<BodyItem>,
                         taken: &mut HashSet<String>| {
        *checks += 1;
        let name = fresh_name(format!("chk_{checks}"), taken);
        let args: Vec<Term> = vars.iter().map(|v| Term::Var(v.clone())).collect();
        for body in branches {
            check_rules.push(Rule::new(
                Some(Literal {
                    classical: false,
                    naf: true,
                    atom: Term::compound(name.clone(), args.clone()),
                }),
                body,
            ));
        }
        let call = Literal { classical: false, naf: true, atom: Term::compound(name, args) };
        entry_body.push(wrap_foralls(&vars, call));
    };

    // (a) user denials, in program order
    for rule in program.rules.iter().filter(|r| r.is_denial()) {
        let vars = rule.vars();
        add_check(
            vars,
            branch_bodies(&rule.body),
            &mut checks,
            &mut check_rules,
            &mut entry_body,
            &mut taken,
        );
    }

    // (b) automatic consistency denials for classically negated
    // predicates.  The classical literal leads: its failure closes the
    // check without enumerating the positive predicate's solutions.  A
    // user denial over the same pair already does the job.
    let mut classical_keys: Vec<PredKey> = Vec::new();
    for rule in &program.rules {
        if let Some(h) = &rule.head {
            if h.classical && !classical_keys.contains(&h.key()) {
                classical_keys.push(h.key());
            }
        }
    }
    for key in classical_keys {
        if program.rules.iter().any(|r| r.is_denial() && is_consistency_denial(r, &key)) {
            continue;
        }
        let args = fresh_vars(key.arity, &mut counter);
        let vars: Vec<String> = args.iter().flat_map(|t| t.vars()).collect();
        let body = vec![
            BodyItem::Lit(Literal {
                classical: true,
                naf: false,
                atom: Term::compound(key.name.clone(), args.clone()),
            }),
            BodyItem::Lit(Literal {
                classical: false,
                naf: false,
                atom: Term::compound(key.name.clone(), args.clone()),
            }),
        ];
        add_check(
            vars,
            branch_bodies(&body),
            &mut checks,
            &mut check_rules,
            &mut entry_body,
            &mut taken,
        );
    }

    // (c) rules on an odd-parity loop: enforce body-fails-or-head-holds
    for rule in &program.rules {
        let Some(head) = &rule.head else { continue };
        let head_key = head.key();
        let offending = rule.body.iter().any(|item| match item {
            BodyItem::Lit(l) => graph.reaches_with_parity(&l.key(), &head_key, !l.naf),
            _ => false,
        });
        if !offending {
            continue;
        }
        let vars = rule.vars();
        let mut branches = branch_bodies(&rule.body);
        // Final branch: the body holds and so does the head.
        let mut full = rule.body.clone();
        full.push(BodyItem::Lit(head.clone()));
        branches.push(full);
        add_check(vars, branches, &mut checks, &mut check_rules, &mut entry_body, &mut taken);
    }

    let entry_name = fresh_name("nmr_check".to_string(), &mut taken);
    let entry = Literal { classical: false, naf: false, atom: Term::Const(entry_name) };
    let entry_rule = Rule::new(Some(entry.clone()), entry_body);
    NmrCheck { check_rules, entry_rule, entry }
}

/// Is this denial already `:- p(X..), -p(X..)` (in either order, same
/// argument tuple) for the given classical predicate?
fn is_consistency_denial(rule: &Rule, key: &PredKey) -> bool {
    if rule.body.len() != 2 {
        return false;
    }
    let lits: Vec<&Literal> = rule
        .body
        .iter()
        .filter_map(|item| match item {
            BodyItem::Lit(l) if !l.naf => Some(l),
            _ => None,
        })
        .collect();
    if lits.len() != 2 || lits[0].classical == lits[1].classical {
        return false;
    }
    let (pos, neg) = if lits[0].classical { (lits[1], lits[0]) } else { (lits[0], lits[1]) };
    let neg_key = neg.key();
    neg_key.name == key.name
        && neg_key.arity == key.arity
        && pos.key().name == key.name
        && pos.key().arity == key.arity
        && pos.atom.args() == neg.atom.args()
        && pos.atom.args().iter().all(|a| a.is_var())
}

/// The auxiliary names `synthesize_dual` would generate, so the check
/// generator can avoid them.
fn synthesize_dual_names(program: &Program) -> Vec<String> {
    let mut names = Vec::new();
    for key in program.pred_keys() {
        let n = program
            .rules
            .iter()
            .filter(|r| r.head.as_ref().map(|h| h.key() == key).unwrap_or(false))
            .count();
        for i in 0..n {
            names.push(format!("{}_{}", key.name, i + 1));
        }
    }
    names
}
