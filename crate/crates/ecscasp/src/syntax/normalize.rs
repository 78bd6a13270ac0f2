//! Rule normalization and abducible expansion.
//!
//! Normalization makes head unifications explicit: every head argument
//! becomes a distinct variable and the original bindings turn into `=`
//! constraint atoms at the front of the body.  Variables are also
//! standardized apart across rules, so no two rules share a name.

use std::collections::HashMap;

use super::{BodyItem, ConstraintAtom, Literal, Program, Rule, Term};

#[derive(Clone, Debug)]
pub struct NormalizeError {
    pub msg: String,
}

impl std::fmt::Display for NormalizeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.msg)
    }
}

impl std::error::Error for NormalizeError {}

/// Prefix for variables minted during normalization.  Runtime renaming
/// uses different prefixes, so generated names never collide.
fn fresh_var(counter: &mut u64) -> String {
    *counter += 1;
    format!("_G{}", counter)
}

pub fn normalize(program: &Program) -> Program {
    let mut counter = 0u64;
    let rules = program.rules.iter().map(|r| normalize_rule(r, &mut counter)).collect();
    Program { rules, directives: program.directives.clone() }
}

fn normalize_rule(rule: &Rule, counter: &mut u64) -> Rule {
    // Standardize apart: every variable of the rule gets a fresh name.
    let mut renames: HashMap<String, String> = HashMap::new();
    let mut rename = |v: &str, counter: &mut u64| -> String {
        renames.entry(v.to_string()).or_insert_with(|| fresh_var(counter)).clone()
    };

    let mut head = None;
    let mut eqs: Vec<BodyItem> = Vec::new();
    if let Some(h) = &rule.head {
        let renamed_atom = rename_term(&h.atom, &mut |v| rename(v, counter));
        let atom = match renamed_atom {
            Term::Compound(name, args) => {
                let mut head_args = Vec::with_capacity(args.len());
                for arg in args {
                    match arg {
                        // A variable seen for the first time among the head
                        // arguments stays put.
                        Term::Var(v) if !head_args.contains(&Term::Var(v.clone())) => {
                            head_args.push(Term::Var(v));
                        }
                        other => {
                            let fresh = fresh_var(counter);
                            eqs.push(BodyItem::Con(ConstraintAtom::herb_eq(
                                Term::Var(fresh.clone()),
                                other,
                            )));
                            head_args.push(Term::Var(fresh));
                        }
                    }
                }
                Term::Compound(name, head_args)
            }
            other => other,
        };
        head = Some(Literal { classical: h.classical, naf: h.naf, atom });
    }

    let mut body = eqs;
    for item in &rule.body {
        body.push(rename_body_item(item, &mut |v| rename(v, counter)));
    }
    Rule { head, body, line: rule.line }
}

pub(crate) fn rename_term(term: &Term, rename: &mut impl FnMut(&str) -> String) -> Term {
    match term {
        Term::Var(v) => Term::Var(rename(v)),
        Term::Compound(name, args) => Term::Compound(
            name.clone(),
            args.iter().map(|a| rename_term(a, rename)).collect(),
        ),
        other => other.clone(),
    }
}

pub(crate) fn rename_body_item(
    item: &BodyItem,
    rename: &mut impl FnMut(&str) -> String,
) -> BodyItem {
    match item {
        BodyItem::Lit(l) => BodyItem::Lit(Literal {
            classical: l.classical,
            naf: l.naf,
            atom: rename_term(&l.atom, rename),
        }),
        BodyItem::Con(ConstraintAtom::Num { op, lhs, rhs }) => {
            BodyItem::Con(ConstraintAtom::Num {
                op: *op,
                lhs: rename_linexpr(lhs, rename),
                rhs: rename_linexpr(rhs, rename),
            })
        }
        BodyItem::Con(ConstraintAtom::Herb { eq, lhs, rhs }) => {
            BodyItem::Con(ConstraintAtom::Herb {
                eq: *eq,
                lhs: rename_term(lhs, rename),
                rhs: rename_term(rhs, rename),
            })
        }
        BodyItem::Forall { var, inner } => BodyItem::Forall {
            var: rename(var),
            inner: Box::new(rename_body_item(inner, rename)),
        },
    }
}

pub(crate) fn rename_linexpr(
    e: &super::LinExpr,
    rename: &mut impl FnMut(&str) -> String,
) -> super::LinExpr {
    let mut out = super::LinExpr::constant(e.constant.clone());
    for (v, c) in &e.terms {
        out.add_term(&rename(v), c.clone());
    }
    out
}

/// Replace each `#abducible a.` declaration with an even negation loop
/// that makes `a` hold in one world and fail in the other:
///
/// ```text
/// a :- not a_flip.
/// a_flip :- not a.
/// ```
///
/// where `a_flip` is a fresh hidden atom, excluded from printed models.
/// Returns the expanded program together with the hidden predicate names.
pub fn expand_abducibles(program: &Program) -> Result<(Program, Vec<String>), NormalizeError> {
    let mut out = program.clone();
    out.directives.abducibles.clear();
    let mut hidden = Vec::new();
    for (idx, atom) in program.directives.abducibles.iter().enumerate() {
        // An abducible must not overlap a head that ordinary rules
        // already define, otherwise the two-world reading is ambiguous.
        for rule in &program.rules {
            if let Some(h) = &rule.head {
                if !h.classical && could_unify(&h.atom, atom) {
                    return Err(NormalizeError {
                        msg: format!(
                            "#abducible {atom} conflicts with an ordinary rule for the same atom"
                        ),
                    });
                }
            }
        }
        let flip_name = fresh_flip_name(program, idx);
        hidden.push(flip_name.clone());
        let vars = atom.vars();
        let flip_atom = Term::compound(
            flip_name,
            vars.iter().map(|v| Term::Var(v.clone())).collect(),
        );
        out.rules.push(Rule::new(
            Some(Literal::pos(atom.clone())),
            vec![BodyItem::Lit(Literal::new(false, true, flip_atom.clone()))],
        ));
        out.rules.push(Rule::new(
            Some(Literal::pos(flip_atom)),
            vec![BodyItem::Lit(Literal::new(false, true, atom.clone()))],
        ));
    }
    Ok((out, hidden))
}

fn fresh_flip_name(program: &Program, idx: usize) -> String {
    let used: Vec<String> = program.pred_keys().into_iter().map(|k| k.name).collect();
    let mut candidate = format!("abd{}", idx + 1);
    while used.contains(&candidate) {
        candidate.push('_');
    }
    candidate
}

/// One-sided structural compatibility: can the two terms possibly denote
/// the same atom for some instantiation?  Variables match anything.
fn could_unify(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Var(_), _) | (_, Term::Var(_)) => true,
        (Term::Rat(x), Term::Rat(y)) => x == y,
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| could_unify(x, y))
        }
        _ => false,
    }
}
