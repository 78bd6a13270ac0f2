//! Rendering of programs back into the input grammar.  Parsing the
//! printed form yields the same AST up to variable renaming.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{BodyItem, ConstraintAtom, LinExpr, Literal, NumOp, Program, Rule, Term, CONS, NIL};
use crate::rat::rat_to_string;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Rat(q) => write!(f, "{}", rat_to_string(q)),
            Term::Const(name) => write!(f, "{name}"),
            Term::Compound(name, args) if name == CONS && args.len() == 2 => {
                write!(f, "[")?;
                write_list(f, &args[0], &args[1])?;
                write!(f, "]")
            }
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &Term, tail: &Term) -> fmt::Result {
    write!(f, "{head}")?;
    match tail {
        Term::Const(n) if n == NIL => Ok(()),
        Term::Compound(n, args) if n == CONS && args.len() == 2 => {
            write!(f, ",")?;
            write_list(f, &args[0], &args[1])
        }
        other => write!(f, "|{other}"),
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.naf {
            write!(f, "not ")?;
        }
        if self.classical {
            write!(f, "-")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (var, coeff) in &self.terms {
            if first {
                if coeff.is_one() {
                    write!(f, "{var}")?;
                } else if (-coeff.clone()).is_one() {
                    write!(f, "-{var}")?;
                } else {
                    write!(f, "{}*{var}", rat_to_string(coeff))?;
                }
                first = false;
            } else if coeff.is_negative() {
                let a = -coeff.clone();
                if a.is_one() {
                    write!(f, " - {var}")?;
                } else {
                    write!(f, " - {}*{var}", rat_to_string(&a))?;
                }
            } else if coeff.is_one() {
                write!(f, " + {var}")?;
            } else {
                write!(f, " + {}*{var}", rat_to_string(coeff))?;
            }
        }
        if first {
            write!(f, "{}", rat_to_string(&self.constant))?;
        } else if self.constant.is_negative() {
            write!(f, " - {}", rat_to_string(&-self.constant.clone()))?;
        } else if !self.constant.is_zero() {
            write!(f, " + {}", rat_to_string(&self.constant))?;
        }
        Ok(())
    }
}

pub(crate) fn dotted_op(op: NumOp) -> &'static str {
    match op {
        NumOp::Lt => ".<.",
        NumOp::Gt => ".>.",
        NumOp::Le => ".=<.",
        NumOp::Ge => ".>=.",
        NumOp::Eq => ".=.",
        NumOp::Ne => ".\\=.",
    }
}

impl fmt::Display for ConstraintAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintAtom::Num { op, lhs, rhs } => {
                write!(f, "{lhs} {} {rhs}", dotted_op(*op))
            }
            ConstraintAtom::Herb { eq: true, lhs, rhs } => write!(f, "{lhs} = {rhs}"),
            ConstraintAtom::Herb { eq: false, lhs, rhs } => write!(f, "{lhs} \\= {rhs}"),
        }
    }
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Lit(l) => write!(f, "{l}"),
            BodyItem::Con(c) => write!(f, "{c}"),
            BodyItem::Forall { var, inner } => write!(f, "forall({var}, {inner})"),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.head, self.body.is_empty()) {
            (Some(h), true) => write!(f, "{h}."),
            (Some(h), false) => {
                write!(f, "{h} :- ")?;
                write_body(f, &self.body)?;
                write!(f, ".")
            }
            (None, _) => {
                write!(f, ":- ")?;
                write_body(f, &self.body)?;
                write!(f, ".")
            }
        }
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, body: &[BodyItem]) -> fmt::Result {
    for (i, item) in body.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

/// Render a rule with its variables renamed to A, B, C, ... in first
/// appearance order.
pub fn rule_to_string(rule: &Rule) -> String {
    canonical_rule(rule).to_string()
}

fn canonical_name(n: usize) -> String {
    let letter = (b'A' + (n % 26) as u8) as char;
    if n < 26 {
        letter.to_string()
    } else {
        format!("{}{}", letter, n / 26)
    }
}

fn canonical_rule(rule: &Rule) -> Rule {
    use std::collections::HashMap;
    let mut map: HashMap<String, String> = HashMap::new();
    let mut rename = |v: &str| -> String {
        let next = map.len();
        map.entry(v.to_string()).or_insert_with(|| canonical_name(next)).clone()
    };
    let head = rule.head.as_ref().map(|h| Literal {
        classical: h.classical,
        naf: h.naf,
        atom: super::rename_term(&h.atom, &mut rename),
    });
    let body = rule.body.iter().map(|b| super::rename_body_item(b, &mut rename)).collect();
    Rule { head, body, line: rule.line }
}

pub fn program_to_string(program: &Program) -> String {
    let mut out = String::new();
    for a in &program.directives.abducibles {
        out.push_str(&format!("#abducible {a}.\n"));
    }
    if !program.directives.shows.is_empty() {
        out.push_str("#show ");
        for (i, s) in program.directives.shows.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            if s.classical {
                out.push('-');
            }
            out.push_str(&format!("{}/{}", s.name, s.arity));
        }
        out.push_str(".\n");
    }
    for rule in &program.rules {
        out.push_str(&rule.to_string());
        out.push('\n');
    }
    out
}
