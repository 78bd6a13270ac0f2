//! Answer rendering: the `{ lit(V | {C}), ... }` notation for models
//! followed by the query bindings, plus a JSON form carrying the same
//! strings so the two round-trip.
//!
//! Printed constraints use the `#`-operator family for numeric
//! comparisons and `\=` for disequalities; rationals print as `n/d`
//! exactly, or in decimal notation (display only, marked when truncated)
//! under the decimal flag.

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::engine::{Answer, Binding, Compiled, JustKind, JustNode, ModelLit};
use crate::rat::{rat_to_decimal, rat_to_string, Rat};
use crate::syntax::{ConstraintAtom, LinExpr, NumOp, Term, CONS, NIL};

#[derive(Clone, Copy, Debug, Default)]
pub struct RenderOpts {
    /// Render rationals as decimals (display only; internal values stay
    /// exact).  Non-terminating expansions are truncated with `...`.
    pub decimal: bool,
}

/// Assigns readable names to internal variables: query variables keep
/// their source names, everything else becomes A, B, C, ...
pub struct NameMap {
    map: HashMap<String, String>,
    used: Vec<String>,
    next: usize,
}

impl NameMap {
    pub fn new() -> NameMap {
        NameMap { map: HashMap::new(), used: Vec::new(), next: 0 }
    }

    pub fn reserve(&mut self, internal: &str, display: &str) {
        self.map.insert(internal.to_string(), display.to_string());
        self.used.push(display.to_string());
    }

    pub fn display(&mut self, internal: &str) -> String {
        if let Some(name) = self.map.get(internal) {
            return name.clone();
        }
        let name = loop {
            let candidate = letter_name(self.next);
            self.next += 1;
            if !self.used.iter().any(|u| u == &candidate) {
                break candidate;
            }
        };
        self.map.insert(internal.to_string(), name.clone());
        self.used.push(name.clone());
        name
    }
}

impl Default for NameMap {
    fn default() -> Self {
        NameMap::new()
    }
}

fn letter_name(n: usize) -> String {
    let letter = (b'A' + (n % 26) as u8) as char;
    if n < 26 {
        letter.to_string()
    } else {
        format!("{}{}", letter, n / 26)
    }
}

fn rat_str(q: &Rat, opts: RenderOpts) -> String {
    if opts.decimal {
        rat_to_decimal(q, 12)
    } else {
        rat_to_string(q)
    }
}

fn term_str(term: &Term, names: &mut NameMap, opts: RenderOpts) -> String {
    match term {
        Term::Var(v) => names.display(v),
        Term::Rat(q) => rat_str(q, opts),
        Term::Const(name) => name.clone(),
        Term::Compound(f, args) if f == CONS && args.len() == 2 => {
            let mut items = Vec::new();
            let mut tail = term.clone();
            loop {
                match tail {
                    Term::Compound(ref g, ref a) if g == CONS && a.len() == 2 => {
                        items.push(term_str(&a[0], names, opts));
                        tail = a[1].clone();
                    }
                    Term::Const(ref n) if n == NIL => {
                        return format!("[{}]", items.join(","));
                    }
                    other => {
                        return format!("[{}|{}]", items.join(","), term_str(&other, names, opts));
                    }
                }
            }
        }
        Term::Compound(f, args) => {
            let args: Vec<String> = args.iter().map(|a| term_str(a, names, opts)).collect();
            format!("{}({})", f, args.join(","))
        }
    }
}

fn linexpr_str(e: &LinExpr, names: &mut NameMap, opts: RenderOpts) -> String {
    use num_traits::{One, Signed, Zero};
    let mut out = String::new();
    let mut first = true;
    for (var, coeff) in &e.terms {
        let name = names.display(var);
        if first {
            if coeff.is_one() {
                out.push_str(&name);
            } else if (-coeff.clone()).is_one() {
                out.push_str(&format!("-{name}"));
            } else {
                out.push_str(&format!("{}*{name}", rat_str(coeff, opts)));
            }
            first = false;
        } else if coeff.is_negative() {
            let a = -coeff.clone();
            if a.is_one() {
                out.push_str(&format!(" - {name}"));
            } else {
                out.push_str(&format!(" - {}*{name}", rat_str(&a, opts)));
            }
        } else if coeff.is_one() {
            out.push_str(&format!(" + {name}"));
        } else {
            out.push_str(&format!(" + {}*{name}", rat_str(coeff, opts)));
        }
    }
    if first {
        out.push_str(&rat_str(&e.constant, opts));
    } else if e.constant.is_negative() {
        out.push_str(&format!(" - {}", rat_str(&-e.constant.clone(), opts)));
    } else if !e.constant.is_zero() {
        out.push_str(&format!(" + {}", rat_str(&e.constant, opts)));
    }
    out
}

/// Printed (model-notation) operator names.
fn shown_op(op: NumOp) -> &'static str {
    match op {
        NumOp::Lt => "#<",
        NumOp::Gt => "#>",
        NumOp::Le => "#=<",
        NumOp::Ge => "#>=",
        NumOp::Eq => "#=",
        NumOp::Ne => "\\=",
    }
}

pub fn constraint_str(c: &ConstraintAtom, names: &mut NameMap, opts: RenderOpts) -> String {
    match c {
        ConstraintAtom::Num { op, lhs, rhs } => {
            format!("{} {} {}", linexpr_str(lhs, names, opts), shown_op(*op), linexpr_str(rhs, names, opts))
        }
        ConstraintAtom::Herb { eq, lhs, rhs } => {
            let op = if *eq { "=" } else { "\\=" };
            format!("{} {} {}", term_str(lhs, names, opts), op, term_str(rhs, names, opts))
        }
    }
}

/// A literal with each variable annotated by the constraints that
/// mention it (at the variable's first occurrence).
fn model_lit_str(lit: &ModelLit, names: &mut NameMap, opts: RenderOpts) -> String {
    let mut attached: Vec<bool> = vec![false; lit.constraints.len()];
    fn walk(
        term: &Term,
        lit: &ModelLit,
        attached: &mut Vec<bool>,
        names: &mut NameMap,
        opts: RenderOpts,
    ) -> String {
        match term {
            Term::Var(v) => {
                let display = names.display(v);
                let mut mine = Vec::new();
                for (i, c) in lit.constraints.iter().enumerate() {
                    if attached[i] {
                        continue;
                    }
                    let mut vars = Vec::new();
                    c.collect_vars(&mut vars);
                    if vars.iter().any(|x| x == v) {
                        attached[i] = true;
                        mine.push(constraint_str(c, names, opts));
                    }
                }
                if mine.is_empty() {
                    display
                } else {
                    format!("{} | {{{}}}", display, mine.join(","))
                }
            }
            Term::Compound(f, args) if f == CONS && args.len() == 2 => {
                // Lists with free variables still print element-wise.
                let head = walk(&args[0], lit, attached, names, opts);
                let tail = walk(&args[1], lit, attached, names, opts);
                match &args[1] {
                    Term::Const(n) if n == NIL => format!("[{head}]"),
                    Term::Compound(g, _) if g == CONS => {
                        format!("[{head},{}", tail.trim_start_matches('['))
                    }
                    _ => format!("[{head}|{tail}]"),
                }
            }
            Term::Compound(f, args) => {
                let parts: Vec<String> =
                    args.iter().map(|a| walk(a, lit, attached, names, opts)).collect();
                format!("{}({})", f, parts.join(","))
            }
            other => term_str(other, names, opts),
        }
    }
    let body = walk(&lit.atom, lit, &mut attached, names, opts);
    format!(
        "{}{}{}",
        if lit.naf { "not " } else { "" },
        if lit.classical { "-" } else { "" },
        body
    )
}

fn binding_strs(answer: &Answer, names: &mut NameMap, opts: RenderOpts) -> Vec<String> {
    let mut out = Vec::new();
    for b in &answer.bindings {
        match &b.value {
            Binding::Bound(t) => {
                out.push(format!("{} = {}", b.name, term_str(t, names, opts)));
            }
            Binding::Constrained { var, constraints } => {
                if constraints.is_empty() {
                    continue; // genuinely free
                }
                names.reserve(var, &b.name);
                for c in constraints {
                    out.push(constraint_str(c, names, opts));
                }
            }
        }
    }
    out
}

/// Prepare a name map with the query variables' source names reserved.
fn names_for(answer: &Answer) -> NameMap {
    let mut names = NameMap::new();
    for b in &answer.bindings {
        if let Binding::Constrained { var, .. } = &b.value {
            names.reserve(var, &b.name);
        } else {
            names.used.push(b.name.clone());
        }
    }
    names
}

/// Text form: the show-filtered model in `{ ... }` notation, then the
/// bindings on one line.
pub fn render_answer_text(answer: &Answer, compiled: &Compiled, opts: RenderOpts) -> String {
    let mut names = names_for(answer);
    let lits: Vec<String> = answer
        .shown_model(compiled)
        .iter()
        .map(|m| model_lit_str(m, &mut names, opts))
        .collect();
    let bindings = binding_strs(answer, &mut names, opts);
    let mut out = format!("{{ {} }}", lits.join(",  "));
    if !bindings.is_empty() {
        out.push('\n');
        out.push_str(&bindings.join(", "));
    }
    out
}

fn just_value(node: &JustNode, names: &mut NameMap, opts: RenderOpts) -> Value {
    let how = match node.kind {
        JustKind::Clause => "clause",
        JustKind::Coinduction => "coinduction",
        JustKind::InModel => "in-model",
        JustKind::Undefined => "undefined",
        JustKind::Fact => "fact",
    };
    json!({
        "goal": model_lit_str(&node.lit, names, opts),
        "how": how,
        "children": node.children.iter().map(|c| just_value(c, names, opts)).collect::<Vec<_>>(),
    })
}

/// JSON form: literal and binding strings exactly as the text renderer
/// would print them, plus the justification tree.  Rationals appear in
/// `n/d` notation inside the strings.
pub fn render_answer_json(answer: &Answer, compiled: &Compiled, opts: RenderOpts) -> Value {
    let mut names = names_for(answer);
    let lits: Vec<String> = answer
        .shown_model(compiled)
        .iter()
        .map(|m| model_lit_str(m, &mut names, opts))
        .collect();
    let bindings = binding_strs(answer, &mut names, opts);
    let justification: Vec<Value> =
        answer.justification.iter().map(|n| just_value(n, &mut names, opts)).collect();
    json!({
        "model": lits,
        "bindings": bindings,
        "justification": justification,
    })
}

/// Rebuild the text form from a rendered JSON answer; used to keep the
/// two output modes interchangeable.
pub fn json_answer_to_text(answer: &Value) -> Option<String> {
    let model: Vec<String> = answer
        .get("model")?
        .as_array()?
        .iter()
        .map(|v| v.as_str().unwrap_or_default().to_string())
        .collect();
    let bindings: Vec<String> = answer
        .get("bindings")?
        .as_array()?
        .iter()
        .map(|v| v.as_str().unwrap_or_default().to_string())
        .collect();
    let mut out = format!("{{ {} }}", model.join(",  "));
    if !bindings.is_empty() {
        out.push('\n');
        out.push_str(&bindings.join(", "));
    }
    Some(out)
}

/// Every live constraint over the answer's variables, in the input
/// grammar; the `--dump-store` view.
pub fn render_store_dump(answer: &Answer) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for m in &answer.model {
        for c in &m.constraints {
            let s = c.to_string();
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    for b in &answer.bindings {
        if let Binding::Constrained { constraints, .. } = &b.value {
            for c in constraints {
                let s = c.to_string();
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
    }
    out
}
