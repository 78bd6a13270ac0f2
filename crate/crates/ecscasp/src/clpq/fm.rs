//! Fourier-Motzkin elimination over conjunctions of linear constraints.
//!
//! Rows are kept in the homogeneous form `expr REL 0`.  Equalities are
//! substituted out Gauss-style before inequalities are combined, and
//! strictness is tracked through every combination.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::rat::{rat_int, Rat};
use crate::syntax::LinExpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    /// expr < 0
    Lt,
    /// expr <= 0
    Le,
    /// expr = 0
    Eq,
}

#[derive(Clone, Debug)]
pub struct CanonRow {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl CanonRow {
    pub fn new(expr: LinExpr, rel: Rel) -> CanonRow {
        CanonRow { expr, rel }
    }

    pub fn coeff_of(&self, var: &str) -> Option<Rat> {
        self.expr.terms.iter().find(|(v, _)| v == var).map(|(_, c)| c.clone())
    }

    pub fn is_ground(&self) -> bool {
        self.expr.is_constant()
    }

    pub fn ground_holds(&self) -> bool {
        match self.rel {
            Rel::Lt => self.expr.constant.is_negative(),
            Rel::Le => !self.expr.constant.is_positive(),
            Rel::Eq => self.expr.constant.is_zero(),
        }
    }
}

fn vars_in(rows: &[CanonRow]) -> Vec<String> {
    let mut out = Vec::new();
    for row in rows {
        for (v, _) in &row.expr.terms {
            if !out.iter().any(|x| x == v) {
                out.push(v.clone());
            }
        }
    }
    out
}

/// Substitute `var := value` (a linear expression) into a row.
fn substitute(row: &CanonRow, var: &str, value: &LinExpr) -> CanonRow {
    match row.coeff_of(var) {
        None => row.clone(),
        Some(c) => {
            let mut rest = row.expr.clone();
            rest.terms.retain(|(v, _)| v != var);
            let expr = rest.add(&value.scale(&c));
            CanonRow { expr, rel: row.rel }
        }
    }
}

/// Variable definitions `var = expr` eliminated during Gauss reduction.
type Definitions = Vec<(String, LinExpr)>;

/// Remove equalities by substitution.  Returns the reduced inequality
/// system plus the eliminated definitions `var = expr` (in terms of the
/// remaining variables), or `None` on a ground contradiction.
fn gauss(rows: &[CanonRow]) -> Option<(Vec<CanonRow>, Definitions)> {
    let mut rows: Vec<CanonRow> = rows.to_vec();
    let mut defs: Definitions = Vec::new();
    loop {
        let idx = rows.iter().position(|r| r.rel == Rel::Eq && !r.is_ground());
        match idx {
            None => {
                let mut ok = true;
                rows.retain(|r| {
                    if r.is_ground() {
                        if !r.ground_holds() {
                            ok = false;
                        }
                        false
                    } else {
                        true
                    }
                });
                if !ok {
                    return None;
                }
                return Some((rows, defs));
            }
            Some(i) => {
                let row = rows.remove(i);
                let (var, coeff) = row.expr.terms[0].clone();
                // c*v + rest = 0  =>  v = -rest/c
                let mut rest = row.expr.clone();
                rest.terms.retain(|(v, _)| v != &var);
                let value = rest.scale(&(rat_int(-1) / coeff));
                rows = rows.iter().map(|r| substitute(r, &var, &value)).collect();
                defs = defs
                    .into_iter()
                    .map(|(v, e)| (v, substitute(&CanonRow::new(e, Rel::Eq), &var, &value).expr))
                    .collect();
                defs.push((var, value));
            }
        }
    }
}

/// Eliminate `var` from a system of strict/non-strict inequalities.
fn eliminate(rows: Vec<CanonRow>, var: &str) -> Vec<CanonRow> {
    let mut lowers: Vec<CanonRow> = Vec::new(); // coeff < 0: row bounds var below
    let mut uppers: Vec<CanonRow> = Vec::new(); // coeff > 0: row bounds var above
    let mut rest: Vec<CanonRow> = Vec::new();
    for row in rows {
        match row.coeff_of(var) {
            None => rest.push(row),
            Some(c) if c.is_positive() => uppers.push(row),
            Some(_) => lowers.push(row),
        }
    }
    for lo in &lowers {
        for up in &uppers {
            let cl = lo.coeff_of(var).unwrap(); // negative
            let cu = up.coeff_of(var).unwrap(); // positive
            // Scale so the coefficients cancel.
            let combined = up.expr.scale(&-cl.clone()).add(&lo.expr.scale(&cu));
            let rel = match (lo.rel, up.rel) {
                (Rel::Le, Rel::Le) => Rel::Le,
                _ => Rel::Lt,
            };
            let mut row = CanonRow::new(combined, rel);
            row.expr.terms.retain(|(v, _)| v != var);
            rest.push(row);
        }
    }
    rest
}

fn drop_ground(rows: &mut Vec<CanonRow>) -> bool {
    let mut ok = true;
    rows.retain(|r| {
        if r.is_ground() {
            if !r.ground_holds() {
                ok = false;
            }
            false
        } else {
            true
        }
    });
    ok
}

/// Satisfiability of a conjunction of rows.
pub fn sat(rows: &[CanonRow]) -> bool {
    let Some(mut rows) = gauss(rows).map(|(r, _)| r) else { return false };
    loop {
        if !drop_ground(&mut rows) {
            return false;
        }
        let vars = vars_in(&rows);
        let Some(var) = vars.first() else { return true };
        rows = eliminate(rows, var);
    }
}

/// A satisfying assignment covering every variable of the system, if one
/// exists.
pub fn point(rows: &[CanonRow]) -> Option<HashMap<String, Rat>> {
    let (ineqs, defs) = gauss(rows)?;
    let order: Vec<String> = vars_in(&ineqs);
    let mut stages: Vec<(String, Vec<CanonRow>)> = Vec::new();
    let mut current = ineqs;
    for var in &order {
        let with_var: Vec<CanonRow> =
            current.iter().filter(|r| r.coeff_of(var).is_some()).cloned().collect();
        stages.push((var.clone(), with_var));
        current = eliminate(current, var);
        if !drop_ground(&mut current) {
            return None;
        }
    }
    let mut assign: HashMap<String, Rat> = HashMap::new();
    for (var, bounds) in stages.iter().rev() {
        let mut lower: Option<(Rat, bool)> = None; // (value, strict)
        let mut upper: Option<(Rat, bool)> = None;
        for row in bounds {
            let c = row.coeff_of(var).expect("row mentions the variable");
            let mut rest = row.expr.clone();
            rest.terms.retain(|(v, _)| v != var);
            let value =
                rest.eval(&assign).expect("later variables already assigned") / -c.clone();
            let strict = row.rel == Rel::Lt;
            if c.is_positive() {
                if upper.as_ref().is_none_or(|(u, us)| value < *u || (value == *u && strict && !us))
                {
                    upper = Some((value, strict));
                }
            } else if lower.as_ref().is_none_or(|(l, ls)| value > *l || (value == *l && strict && !ls))
            {
                lower = Some((value, strict));
            }
        }
        let value = match (&lower, &upper) {
            (None, None) => rat_int(0),
            (Some((l, false)), None) => l.clone(),
            (Some((l, true)), None) => l + rat_int(1),
            (None, Some((u, false))) => u.clone(),
            (None, Some((u, true))) => u - rat_int(1),
            (Some((l, ls)), Some((u, us))) => {
                if l == u {
                    if *ls || *us {
                        return None;
                    }
                    l.clone()
                } else if l < u {
                    (l + u) / rat_int(2)
                } else {
                    return None;
                }
            }
        };
        assign.insert(var.clone(), value);
    }
    // Back-substitute the Gauss definitions; variables a definition
    // mentions that nothing constrains default to zero.
    for (var, def) in defs.iter().rev() {
        for (v, _) in &def.terms {
            if !assign.contains_key(v) {
                assign.insert(v.clone(), rat_int(0));
            }
        }
        let value = def.eval(&assign).expect("definition variables assigned");
        assign.insert(var.clone(), value);
    }
    Some(assign)
}

/// Does the system entail `expr = 0`?
pub fn entails_zero(rows: &[CanonRow], expr: &LinExpr) -> bool {
    let mut with_lt = rows.to_vec();
    with_lt.push(CanonRow::new(expr.clone(), Rel::Lt));
    if sat(&with_lt) {
        return false;
    }
    let mut with_gt = rows.to_vec();
    with_gt.push(CanonRow::new(expr.scale(&rat_int(-1)), Rel::Lt));
    !sat(&with_gt)
}

/// Does the system entail `row`?  Checked by refuting the complement.
pub fn entails_row(rows: &[CanonRow], row: &CanonRow) -> bool {
    match row.rel {
        Rel::Eq => entails_zero(rows, &row.expr),
        Rel::Lt => {
            let mut sys = rows.to_vec();
            sys.push(CanonRow::new(row.expr.scale(&rat_int(-1)), Rel::Le));
            !sat(&sys)
        }
        Rel::Le => {
            let mut sys = rows.to_vec();
            sys.push(CanonRow::new(row.expr.scale(&rat_int(-1)), Rel::Lt));
            !sat(&sys)
        }
    }
}

/// Project the system onto `keep`: the result mentions only kept
/// variables and has the same solution set there (solutions extend to
/// full-store solutions).  Redundant rows are pruned and matching
/// inequality pairs are fused back into equalities.
pub fn project(rows: &[CanonRow], keep: &[String]) -> Option<Vec<CanonRow>> {
    let (mut ineqs, defs) = gauss(rows)?;
    for (var, def) in &defs {
        if keep.iter().any(|k| k == var) {
            // var - def = 0, kept as an inequality pair so FM can
            // eliminate any dropped variables the definition mentions.
            let mut expr = def.scale(&rat_int(-1));
            expr.add_term(var, rat_int(1));
            ineqs.push(CanonRow::new(expr.clone(), Rel::Le));
            ineqs.push(CanonRow::new(expr.scale(&rat_int(-1)), Rel::Le));
        }
    }
    loop {
        if !drop_ground(&mut ineqs) {
            return None;
        }
        let dropped: Vec<String> =
            vars_in(&ineqs).into_iter().filter(|v| !keep.contains(v)).collect();
        let Some(var) = dropped.first() else { break };
        ineqs = eliminate(ineqs, var);
    }
    // Fuse e <= 0 with -e <= 0 into e = 0.
    let mut fused: Vec<CanonRow> = Vec::new();
    let mut used = vec![false; ineqs.len()];
    for i in 0..ineqs.len() {
        if used[i] {
            continue;
        }
        if ineqs[i].rel == Rel::Le {
            let neg = ineqs[i].expr.scale(&rat_int(-1));
            if let Some(j) = (i + 1..ineqs.len()).find(|&j| {
                !used[j] && ineqs[j].rel == Rel::Le && proportional(&ineqs[j].expr, &neg)
            }) {
                used[j] = true;
                fused.push(CanonRow::new(ineqs[i].expr.clone(), Rel::Eq));
                continue;
            }
        }
        fused.push(ineqs[i].clone());
    }
    // Drop rows the others already entail, deterministically.
    let mut result: Vec<CanonRow> = Vec::new();
    for i in 0..fused.len() {
        let mut others: Vec<CanonRow> = result.clone();
        others.extend(fused[i + 1..].iter().cloned());
        if !entails_row(&others, &fused[i]) {
            result.push(fused[i].clone());
        }
    }
    Some(result)
}

/// Are the two expressions positive multiples of each other?
fn proportional(a: &LinExpr, b: &LinExpr) -> bool {
    if a.terms.len() != b.terms.len() {
        return false;
    }
    if a.terms.is_empty() {
        return a.constant.is_zero() == b.constant.is_zero();
    }
    let (v0, c0) = &a.terms[0];
    let Some(d0) = b.terms.iter().find(|(v, _)| v == v0).map(|(_, d)| d.clone()) else {
        return false;
    };
    if c0.is_zero() || d0.is_zero() {
        return false;
    }
    let k = d0 / c0.clone();
    if !k.is_positive() {
        return false;
    }
    for (v, c) in &a.terms {
        let Some(d) = b.terms.iter().find(|(bv, _)| bv == v).map(|(_, d)| d.clone()) else {
            return false;
        };
        if d != c * &k {
            return false;
        }
    }
    b.constant == &a.constant * &k
}
