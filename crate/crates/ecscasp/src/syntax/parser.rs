//! Recursive-descent parser for programs, queries, and directives.

use std::path::{Path, PathBuf};

use super::lexer::{lex, Pos, Tok, Token};
use super::{
    BodyItem, ConstraintAtom, LinExpr, Literal, NumOp, Program, Rule, ShowSpec, Term,
};
use crate::rat::{rat_int, Rat};
use num_traits::Zero;

#[derive(Clone, Debug)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// Supplies the text of `#include`d programs.  Lookups are first tried
/// by bare name (for bundled libraries), then as a path relative to the
/// including file.
pub trait FileResolver {
    fn resolve(&self, name: &str, from: Option<&Path>) -> Result<(String, Option<PathBuf>), String>;
}

/// Rejects every include; used by [`parse_program`].
struct NoIncludes;

impl FileResolver for NoIncludes {
    fn resolve(&self, name: &str, _from: Option<&Path>) -> Result<(String, Option<PathBuf>), String> {
        Err(format!("cannot resolve include `{name}`: no resolver configured"))
    }
}

/// Parse a standalone program; `#include` directives are an error.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with_includes(text, &NoIncludes)
}

/// Parse a program, resolving `#include` directives through `resolver`.
/// Include cycles are reported as errors.
pub fn parse_program_with_includes(
    text: &str,
    resolver: &dyn FileResolver,
) -> Result<Program, ParseError> {
    let mut seen = Vec::new();
    parse_unit(text, resolver, None, &mut seen)
}

fn parse_unit(
    text: &str,
    resolver: &dyn FileResolver,
    path: Option<&Path>,
    seen: &mut Vec<String>,
) -> Result<Program, ParseError> {
    let toks = lex(text).map_err(|e| ParseError { line: e.pos.line, col: e.pos.col, msg: e.msg })?;
    let mut p = Parser::new(&toks);
    let mut program = Program::default();
    while !p.at_end() {
        if let Some(name) = p.try_include()? {
            let pos = p.last_pos();
            let key = match path {
                Some(base) => format!("{}::{}", base.display(), name),
                None => name.clone(),
            };
            if seen.contains(&key) {
                return Err(ParseError {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("include cycle through `{name}`"),
                });
            }
            seen.push(key);
            let (included_text, included_path) = resolver.resolve(&name, path).map_err(|msg| {
                ParseError { line: pos.line, col: pos.col, msg }
            })?;
            let sub = parse_unit(&included_text, resolver, included_path.as_deref(), seen)?;
            seen.pop();
            program.directives.includes.push(name);
            program.merge(sub);
            continue;
        }
        let item = p.parse_item()?;
        match item {
            Item::Rule(rule) => program.rules.push(rule),
            Item::Abducible(term) => program.directives.abducibles.push(term),
            Item::Show(specs) => program.directives.shows.extend(specs),
        }
    }
    Ok(program)
}

/// Parse a query of the form `?- G1, ..., Gn.`
pub fn parse_query(text: &str) -> Result<Vec<BodyItem>, ParseError> {
    let toks = lex(text).map_err(|e| ParseError { line: e.pos.line, col: e.pos.col, msg: e.msg })?;
    let mut p = Parser::new(&toks);
    p.expect(&Tok::QueryDash, "expected `?-`")?;
    let body = p.parse_body()?;
    p.expect(&Tok::Dot, "expected `.` at end of query")?;
    if !p.at_end() {
        return p.error("trailing input after query");
    }
    if body.is_empty() {
        return p.error("empty query");
    }
    Ok(body)
}

enum Item {
    Rule(Rule),
    Abducible(Term),
    Show(Vec<ShowSpec>),
}

/// Arithmetic syntax tree for constraint sides, before classification
/// into a linear expression or a plain Herbrand term.
enum Expr {
    Leaf(Term),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    fn as_term(&self) -> Option<&Term> {
        match self {
            Expr::Leaf(t) => Some(t),
            _ => None,
        }
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    anon: u64,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token]) -> Self {
        Parser { toks, i: 0, anon: 0 }
    }

    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.i + 1).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.i);
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn last_pos(&self) -> Pos {
        if self.i == 0 {
            return Pos { line: 1, col: 1 };
        }
        self.toks
            .get(self.i - 1)
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.i)
            .map(|t| t.pos)
            .unwrap_or_else(|| {
                self.toks
                    .last()
                    .map(|t| t.pos)
                    .unwrap_or(Pos { line: 1, col: 1 })
            })
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let pos = self.pos();
        Err(ParseError { line: pos.line, col: pos.col, msg: msg.into() })
    }

    fn expect(&mut self, tok: &Tok, msg: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == tok => {
                self.i += 1;
                Ok(())
            }
            _ => self.error(msg),
        }
    }

    fn fresh_anon(&mut self) -> Term {
        self.anon += 1;
        Term::Var(format!("_Anon__{}", self.anon))
    }

    fn try_include(&mut self) -> Result<Option<String>, ParseError> {
        if let Some(Tok::Hash(name)) = self.peek() {
            if name == "include" {
                self.i += 1;
                let target = match self.next().map(|t| t.tok.clone()) {
                    Some(Tok::Name(n)) => n,
                    Some(Tok::Str(s)) => s,
                    _ => return self.error("expected file name after #include"),
                };
                self.expect(&Tok::Dot, "expected `.` after #include")?;
                return Ok(Some(target));
            }
        }
        Ok(None)
    }

    fn parse_item(&mut self) -> Result<Item, ParseError> {
        match self.peek() {
            Some(Tok::Hash(name)) => {
                let name = name.clone();
                self.i += 1;
                match name.as_str() {
                    "abducible" => {
                        let atom = self.parse_term()?;
                        if atom.indicator().is_none() {
                            return self.error("#abducible expects an atom");
                        }
                        self.expect(&Tok::Dot, "expected `.` after #abducible")?;
                        Ok(Item::Abducible(atom))
                    }
                    "show" => {
                        let mut specs = vec![self.parse_show_spec()?];
                        while self.peek() == Some(&Tok::Comma) {
                            self.i += 1;
                            specs.push(self.parse_show_spec()?);
                        }
                        self.expect(&Tok::Dot, "expected `.` after #show")?;
                        Ok(Item::Show(specs))
                    }
                    other => self.error(format!("unknown directive #{other}")),
                }
            }
            _ => Ok(Item::Rule(self.parse_rule()?)),
        }
    }

    fn parse_show_spec(&mut self) -> Result<ShowSpec, ParseError> {
        let classical = if self.peek() == Some(&Tok::Minus) {
            self.i += 1;
            true
        } else {
            false
        };
        let name = match self.next().map(|t| t.tok.clone()) {
            Some(Tok::Name(n)) => n,
            _ => return self.error("expected predicate name in #show"),
        };
        self.expect(&Tok::Slash, "expected `/` in #show spec")?;
        let arity = match self.next().map(|t| t.tok.clone()) {
            Some(Tok::Num(n)) if n.is_integer() => {
                use num_traits::ToPrimitive;
                match n.numer().to_usize() {
                    Some(a) => a,
                    None => return self.error("arity out of range"),
                }
            }
            _ => return self.error("expected arity in #show spec"),
        };
        Ok(ShowSpec { classical, name, arity })
    }

    fn parse_rule(&mut self) -> Result<Rule, ParseError> {
        let line = self.pos().line;
        if self.peek() == Some(&Tok::ColonDash) {
            self.i += 1;
            let body = self.parse_body()?;
            if body.is_empty() {
                return self.error("a denial needs a non-empty body");
            }
            self.expect(&Tok::Dot, "expected `.` at end of denial")?;
            return Ok(Rule { head: None, body, line: Some(line) });
        }
        let head = self.parse_head_literal()?;
        match self.peek() {
            Some(Tok::Dot) => {
                self.i += 1;
                Ok(Rule { head: Some(head), body: Vec::new(), line: Some(line) })
            }
            Some(Tok::ColonDash) => {
                self.i += 1;
                let body = self.parse_body()?;
                self.expect(&Tok::Dot, "expected `.` at end of rule")?;
                Ok(Rule { head: Some(head), body, line: Some(line) })
            }
            _ => self.error("expected `.` or `:-` after rule head"),
        }
    }

    fn parse_head_literal(&mut self) -> Result<Literal, ParseError> {
        if let Some(Tok::Name(n)) = self.peek() {
            if n == "not" {
                return self.error("default negation is not allowed in a rule head");
            }
        }
        let classical = if self.peek() == Some(&Tok::Minus) {
            self.i += 1;
            true
        } else {
            false
        };
        let atom = self.parse_term()?;
        if atom.indicator().is_none() {
            return self.error("rule head must be an atom");
        }
        Ok(Literal { classical, naf: false, atom })
    }

    fn parse_body(&mut self) -> Result<Vec<BodyItem>, ParseError> {
        let mut items = vec![self.parse_body_item()?];
        while self.peek() == Some(&Tok::Comma) {
            self.i += 1;
            items.push(self.parse_body_item()?);
        }
        Ok(items)
    }

    fn parse_body_item(&mut self) -> Result<BodyItem, ParseError> {
        // `not` (optionally classical) literal
        if let Some(Tok::Name(n)) = self.peek() {
            if n == "not" {
                self.i += 1;
                let classical = if self.peek() == Some(&Tok::Minus) {
                    self.i += 1;
                    true
                } else {
                    false
                };
                let atom = self.parse_term()?;
                if atom.indicator().is_none() {
                    return self.error("`not` expects an atom");
                }
                return Ok(BodyItem::Lit(Literal { classical, naf: true, atom }));
            }
        }
        // `-p(...)` classical literal (minus followed by a name)
        if self.peek() == Some(&Tok::Minus) {
            if let Some(Tok::Name(_)) = self.peek2() {
                self.i += 1;
                let atom = self.parse_term()?;
                if atom.indicator().is_none() {
                    return self.error("`-` expects an atom");
                }
                return Ok(BodyItem::Lit(Literal { classical: true, naf: false, atom }));
            }
        }
        let lhs = self.parse_expr()?;
        let op = match self.peek() {
            Some(Tok::DotOp(op)) => Some((*op, true)),
            Some(Tok::Eq) => Some(("=", false)),
            Some(Tok::Ne) => Some(("\\=", false)),
            _ => None,
        };
        match op {
            Some((op, dotted)) => {
                self.i += 1;
                let rhs = self.parse_expr()?;
                self.classify_constraint(op, dotted, lhs, rhs)
            }
            None => match lhs.as_term() {
                Some(t) if t.indicator().is_some() => {
                    Ok(BodyItem::Lit(Literal { classical: false, naf: false, atom: t.clone() }))
                }
                Some(Term::Var(_)) => self.error("a variable cannot be called as a goal"),
                _ => self.error("expected a literal or constraint"),
            },
        }
    }

    fn classify_constraint(
        &self,
        op: &str,
        dotted: bool,
        lhs: Expr,
        rhs: Expr,
    ) -> Result<BodyItem, ParseError> {
        let num_op = match op {
            ".<." => Some(NumOp::Lt),
            ".>." => Some(NumOp::Gt),
            ".=<." => Some(NumOp::Le),
            ".>=." => Some(NumOp::Ge),
            ".=." | "=" => Some(NumOp::Eq),
            ".\\=." | "\\=" => Some(NumOp::Ne),
            _ => None,
        };
        let num_op = match num_op {
            Some(op) => op,
            None => return self.error(format!("unknown constraint operator `{op}`")),
        };
        let is_equational = matches!(num_op, NumOp::Eq | NumOp::Ne);
        if dotted || !is_equational {
            match (self.linearize(&lhs), self.linearize(&rhs)) {
                (Ok(l), Ok(r)) => return Ok(BodyItem::Con(ConstraintAtom::num(num_op, l, r))),
                (Err(e), _) | (_, Err(e)) => {
                    // `.=.`/`.\=.` between plain terms falls back to the
                    // Herbrand reading; order comparisons never do.
                    if is_equational {
                        if let (Some(lt), Some(rt)) = (lhs.as_term(), rhs.as_term()) {
                            return Ok(BodyItem::Con(ConstraintAtom::Herb {
                                eq: num_op == NumOp::Eq,
                                lhs: lt.clone(),
                                rhs: rt.clone(),
                            }));
                        }
                    }
                    return Err(e);
                }
            }
        }
        // plain `=` / `\=`: Herbrand between plain terms
        match (lhs.as_term(), rhs.as_term()) {
            (Some(lt), Some(rt)) => Ok(BodyItem::Con(ConstraintAtom::Herb {
                eq: num_op == NumOp::Eq,
                lhs: lt.clone(),
                rhs: rt.clone(),
            })),
            _ => self.error("`=`/`\\=` expect plain terms; use `.=.` for arithmetic"),
        }
    }

    /// Flatten an expression into linear form, or explain why it is not
    /// numeric-linear.
    fn linearize(&self, e: &Expr) -> Result<LinExpr, ParseError> {
        match e {
            Expr::Leaf(Term::Rat(q)) => Ok(LinExpr::constant(q.clone())),
            Expr::Leaf(Term::Var(v)) => Ok(LinExpr::var(v.clone())),
            Expr::Leaf(_) => self.error("non-numeric term in arithmetic expression"),
            Expr::Add(a, b) => Ok(self.linearize(a)?.add(&self.linearize(b)?)),
            Expr::Sub(a, b) => Ok(self.linearize(a)?.sub(&self.linearize(b)?)),
            Expr::Neg(a) => Ok(self.linearize(a)?.scale(&rat_int(-1))),
            Expr::Mul(a, b) => {
                let la = self.linearize(a)?;
                let lb = self.linearize(b)?;
                if la.is_constant() {
                    Ok(lb.scale(&la.constant))
                } else if lb.is_constant() {
                    Ok(la.scale(&lb.constant))
                } else {
                    self.error("non-linear numeric expression: product of two variables")
                }
            }
            Expr::Div(a, b) => {
                let la = self.linearize(a)?;
                let lb = self.linearize(b)?;
                if !lb.is_constant() {
                    return self.error("division only by numeric literals");
                }
                if lb.constant.is_zero() {
                    return self.error("division by zero");
                }
                Ok(la.scale(&(rat_int(1) / lb.constant)))
            }
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if self.peek() == Some(&Tok::Minus) {
            self.i += 1;
            match self.parse_mul()? {
                // a negated numeric literal is still a plain term
                Expr::Leaf(Term::Rat(q)) => Expr::Leaf(Term::Rat(-q)),
                e => Expr::Neg(Box::new(e)),
            }
        } else {
            self.parse_mul()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.i += 1;
                    let rhs = self.parse_mul()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.i += 1;
                    let rhs = self.parse_mul()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_primary_expr()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.i += 1;
                    let rhs = self.parse_primary_expr()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.i += 1;
                    let rhs = self.parse_primary_expr()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_primary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::LParen) {
            self.i += 1;
            let inner = self.parse_expr()?;
            self.expect(&Tok::RParen, "expected `)`")?;
            return Ok(inner);
        }
        Ok(Expr::Leaf(self.parse_term()?))
    }

    /// A plain term: variable, rational, constant, compound, or list.
    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Var(name)) => {
                self.i += 1;
                Ok(Term::Var(name))
            }
            Some(Tok::Anon) => {
                self.i += 1;
                Ok(self.fresh_anon())
            }
            Some(Tok::Minus) => {
                self.i += 1;
                match self.peek().cloned() {
                    Some(Tok::Num(_)) => {
                        let t = self.parse_number()?;
                        match t {
                            Term::Rat(q) => Ok(Term::Rat(-q)),
                            _ => unreachable!(),
                        }
                    }
                    _ => self.error("expected a number after `-` in a term"),
                }
            }
            Some(Tok::Num(_)) => self.parse_number(),
            Some(Tok::Name(name)) => {
                self.i += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.i += 1;
                    let mut args = vec![self.parse_term()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.i += 1;
                        args.push(self.parse_term()?);
                    }
                    self.expect(&Tok::RParen, "expected `)`")?;
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Const(name))
                }
            }
            Some(Tok::LBracket) => {
                self.i += 1;
                if self.peek() == Some(&Tok::RBracket) {
                    self.i += 1;
                    return Ok(Term::nil());
                }
                let mut items = vec![self.parse_term()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.i += 1;
                    items.push(self.parse_term()?);
                }
                let tail = if self.peek() == Some(&Tok::Pipe) {
                    self.i += 1;
                    self.parse_term()?
                } else {
                    Term::nil()
                };
                self.expect(&Tok::RBracket, "expected `]`")?;
                Ok(items.into_iter().rev().fold(tail, |t, h| Term::cons(h, t)))
            }
            _ => self.error("expected a term"),
        }
    }

    /// A numeric literal, reading `n/d` as an exact rational when both
    /// sides are plain numbers.
    fn parse_number(&mut self) -> Result<Term, ParseError> {
        let first = match self.next().map(|t| t.tok.clone()) {
            Some(Tok::Num(n)) => n,
            _ => return self.error("expected a number"),
        };
        if self.peek() == Some(&Tok::Slash) {
            if let Some(Tok::Num(d)) = self.peek2() {
                let d: Rat = d.clone();
                if d.is_zero() {
                    return self.error("zero denominator in rational literal");
                }
                self.i += 2;
                return Ok(Term::Rat(first / d));
            }
        }
        Ok(Term::Rat(first))
    }
}
