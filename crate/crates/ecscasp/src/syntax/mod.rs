//! Surface syntax: terms, literals, constraint atoms, rules, programs,
//! and the single authority on the grammar they are written in.
//!
//! Rules end with `.`, `:-` separates head and body, `not` marks default
//! negation and a leading `-` classical negation.  Numeric constraints
//! are written with the dotted operator family (`.<.`, `.>.`, `.=<.`,
//! `.>=.`, `.=.`, `.\=.`); plain `=` and `\=` denote equality and
//! disequality over Herbrand terms.  `#include`, `#abducible` and
//! `#show` directives are recognized, `%` starts a line comment.

mod lexer;
mod normalize;
mod parser;
mod printer;

pub use normalize::{expand_abducibles, normalize, NormalizeError};
pub(crate) use normalize::{rename_body_item, rename_term};
pub use parser::{
    parse_program, parse_program_with_includes, parse_query, FileResolver, ParseError,
};
pub use printer::{program_to_string, rule_to_string};

use crate::rat::Rat;

/// Functor used internally for list cells; `[H|T]` desugars to it and the
/// printer always re-sugars.
pub const CONS: &str = ".";
/// The empty list constant.
pub const NIL: &str = "[]";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Rat(Rat),
    Const(String),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn compound(name: impl Into<String>, args: Vec<Term>) -> Term {
        let name = name.into();
        if args.is_empty() {
            Term::Const(name)
        } else {
            Term::Compound(name, args)
        }
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Compound(CONS.to_string(), vec![head, tail])
    }

    pub fn nil() -> Term {
        Term::Const(NIL.to_string())
    }

    pub fn list(items: Vec<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(Term::nil(), |tail, head| Term::cons(head, tail))
    }

    /// Predicate name and arity of an atom term.
    pub fn indicator(&self) -> Option<(&str, usize)> {
        match self {
            Term::Const(name) => Some((name, 0)),
            Term::Compound(name, args) => Some((name, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
            _ => {}
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }
}

/// A possibly negated atom.  `not -p(X)` carries both flags.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    /// Classical negation: the atom family `-p`, provable only via rules
    /// for `-p`.
    pub classical: bool,
    /// Default negation: `not ...`, solved against the dual program.
    pub naf: bool,
    pub atom: Term,
}

impl Literal {
    pub fn pos(atom: Term) -> Literal {
        Literal { classical: false, naf: false, atom }
    }

    pub fn new(classical: bool, naf: bool, atom: Term) -> Literal {
        Literal { classical, naf, atom }
    }

    pub fn negate_default(&self) -> Literal {
        Literal { classical: self.classical, naf: !self.naf, atom: self.atom.clone() }
    }

    pub fn key(&self) -> PredKey {
        let (name, arity) = self
            .atom
            .indicator()
            .expect("literal atom must be a constant or compound");
        PredKey { classical: self.classical, name: name.to_string(), arity }
    }
}

/// Identity of a predicate: classical-negation family, name, arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub classical: bool,
    pub name: String,
    pub arity: usize,
}

impl std::fmt::Display for PredKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.classical {
            write!(f, "-{}/{}", self.name, self.arity)
        } else {
            write!(f, "{}/{}", self.name, self.arity)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NumOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

/// A linear expression over variables with exact rational coefficients.
/// Terms are kept in first-appearance order with no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinExpr {
    pub terms: Vec<(String, Rat)>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn constant(value: Rat) -> LinExpr {
        LinExpr { terms: Vec::new(), constant: value }
    }

    pub fn var(name: impl Into<String>) -> LinExpr {
        LinExpr {
            terms: vec![(name.into(), crate::rat::rat_int(1))],
            constant: crate::rat::rat_int(0),
        }
    }

    pub fn add_term(&mut self, var: &str, coeff: Rat) {
        use num_traits::Zero;
        if let Some(entry) = self.terms.iter_mut().find(|(v, _)| v == var) {
            entry.1 += coeff;
        } else {
            self.terms.push((var.to_string(), coeff));
        }
        self.terms.retain(|(_, c)| !c.is_zero());
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.add_term(v, c.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn scale(&self, k: &Rat) -> LinExpr {
        use num_traits::Zero;
        if k.is_zero() {
            return LinExpr::constant(crate::rat::rat_int(0));
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(&crate::rat::rat_int(-1)))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> Vec<String> {
        self.terms.iter().map(|(v, _)| v.clone()).collect()
    }

    /// Evaluate under a total assignment; `None` if a variable is missing.
    pub fn eval(&self, assign: &std::collections::HashMap<String, Rat>) -> Option<Rat> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc += c * assign.get(v)?;
        }
        Some(acc)
    }
}

/// A constraint atom: either a linear numeric comparison or a Herbrand
/// (dis)equality between arbitrary terms.  Mixed forms are rejected at
/// parse time.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintAtom {
    Num { op: NumOp, lhs: LinExpr, rhs: LinExpr },
    Herb { eq: bool, lhs: Term, rhs: Term },
}

impl ConstraintAtom {
    pub fn num(op: NumOp, lhs: LinExpr, rhs: LinExpr) -> ConstraintAtom {
        ConstraintAtom::Num { op, lhs, rhs }
    }

    pub fn herb_eq(lhs: Term, rhs: Term) -> ConstraintAtom {
        ConstraintAtom::Herb { eq: true, lhs, rhs }
    }

    pub fn herb_ne(lhs: Term, rhs: Term) -> ConstraintAtom {
        ConstraintAtom::Herb { eq: false, lhs, rhs }
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        let push = |out: &mut Vec<String>, v: &str| {
            if !out.iter().any(|x| x == v) {
                out.push(v.to_string());
            }
        };
        match self {
            ConstraintAtom::Num { lhs, rhs, .. } => {
                for (v, _) in lhs.terms.iter().chain(rhs.terms.iter()) {
                    push(out, v);
                }
            }
            ConstraintAtom::Herb { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }
}

/// One element of a rule body.  `Forall` wrappers only appear in
/// synthesized dual rules, never in source programs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BodyItem {
    Lit(Literal),
    Con(ConstraintAtom),
    Forall { var: String, inner: Box<BodyItem> },
}

impl BodyItem {
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            BodyItem::Lit(l) => l.atom.collect_vars(out),
            BodyItem::Con(c) => c.collect_vars(out),
            BodyItem::Forall { var, inner } => {
                if !out.iter().any(|x| x == var) {
                    out.push(var.clone());
                }
                inner.collect_vars(out);
            }
        }
    }
}

/// A rule; a missing head makes it a denial, an empty body a fact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub head: Option<Literal>,
    pub body: Vec<BodyItem>,
    /// 1-based source line of the rule, when it came from text.
    pub line: Option<u32>,
}

impl Rule {
    pub fn fact(head: Literal) -> Rule {
        Rule { head: Some(head), body: Vec::new(), line: None }
    }

    pub fn new(head: Option<Literal>, body: Vec<BodyItem>) -> Rule {
        Rule { head, body, line: None }
    }

    pub fn is_denial(&self) -> bool {
        self.head.is_none()
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(h) = &self.head {
            h.atom.collect_vars(&mut out);
        }
        for item in &self.body {
            item.collect_vars(&mut out);
        }
        out
    }
}

/// A `#show` specification: predicate indicator plus polarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShowSpec {
    pub classical: bool,
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Directives {
    pub abducibles: Vec<Term>,
    pub shows: Vec<ShowSpec>,
    /// Names of files pulled in while parsing, for diagnostics.
    pub includes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub directives: Directives,
}

impl Program {
    pub fn merge(&mut self, other: Program) {
        self.rules.extend(other.rules);
        self.directives.abducibles.extend(other.directives.abducibles);
        self.directives.shows.extend(other.directives.shows);
        self.directives.includes.extend(other.directives.includes);
    }

    /// Every predicate key mentioned in a head or body literal.
    pub fn pred_keys(&self) -> Vec<PredKey> {
        let mut keys = Vec::new();
        let mut push = |k: PredKey| {
            if !keys.contains(&k) {
                keys.push(k);
            }
        };
        for rule in &self.rules {
            if let Some(h) = &rule.head {
                push(h.key());
            }
            for item in &rule.body {
                collect_body_keys(item, &mut push);
            }
        }
        keys
    }
}

fn collect_body_keys(item: &BodyItem, push: &mut impl FnMut(PredKey)) {
    match item {
        BodyItem::Lit(l) => push(l.key()),
        BodyItem::Con(_) => {}
        BodyItem::Forall { inner, .. } => collect_body_keys(inner, push),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_int;

    #[test]
    fn list_sugar_roundtrip() {
        let t = Term::list(vec![Term::Rat(rat_int(1)), Term::Rat(rat_int(2))]);
        assert_eq!(
            t,
            Term::cons(Term::Rat(rat_int(1)), Term::cons(Term::Rat(rat_int(2)), Term::nil()))
        );
    }

    #[test]
    fn linexpr_algebra() {
        let mut e = LinExpr::var("X");
        e.add_term("X", rat_int(2));
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].1, rat_int(3));
        let z = e.sub(&e.clone());
        assert!(z.is_constant());
    }
}
