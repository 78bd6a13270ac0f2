//! The constraint store: substitution, numeric rows, numeric
//! disequalities, and pending Herbrand disequalities, all under a trail
//! so backtracking restores the store bit-exactly.

use std::collections::HashMap;

use num_traits::Zero;

use super::fm::{self, CanonRow, Rel};
use crate::rat::{rat_int, Rat};
use crate::syntax::{ConstraintAtom, LinExpr, NumOp, Term};

#[derive(Clone, Debug)]
enum Undo {
    Bind(String),
    Row,
    Neq,
    Diseq,
}

#[derive(Clone, Copy, Debug)]
pub struct StoreMark {
    trail: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cmp {
    Equal,
    Diff,
    Maybe,
}

/// Result of analysing a disequality; see [`Store::diseq_branches`].
#[derive(Clone, Debug)]
pub enum DiseqBranches {
    /// Already true: distinct ground structure somewhere.
    True,
    /// The terms are necessarily equal.
    Fail,
    /// Satisfiable by making any listed pair disagree.
    Branches(Vec<(Term, Term)>),
}

#[derive(Clone, Debug, Default)]
pub struct Store {
    bind: HashMap<String, Term>,
    rows: Vec<(LinExpr, Rel)>,
    neqs: Vec<LinExpr>,
    diseqs: Vec<(Term, Term)>,
    trail: Vec<Undo>,
    /// Bumped on any change affecting canonical rows.
    generation: u64,
    canon_cache: std::cell::RefCell<Option<(u64, Option<Vec<CanonRow>>)>>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    pub fn mark(&self) -> StoreMark {
        StoreMark { trail: self.trail.len() }
    }

    pub fn undo_to(&mut self, mark: StoreMark) {
        if self.trail.len() > mark.trail {
            self.generation += 1;
        }
        while self.trail.len() > mark.trail {
            match self.trail.pop().unwrap() {
                Undo::Bind(v) => {
                    self.bind.remove(&v);
                }
                Undo::Row => {
                    self.rows.pop();
                }
                Undo::Neq => {
                    self.neqs.pop();
                }
                Undo::Diseq => {
                    self.diseqs.pop();
                }
            }
        }
    }

    fn shallow_deref<'a>(&'a self, term: &'a Term) -> &'a Term {
        let mut t = term;
        while let Term::Var(v) = t {
            match self.bind.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Full dereference: substitute bindings all the way down.
    pub fn resolve(&self, term: &Term) -> Term {
        let t = self.shallow_deref(term);
        match t {
            Term::Compound(name, args) => {
                Term::Compound(name.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
            other => other.clone(),
        }
    }

    pub fn is_unbound_var(&self, term: &Term) -> bool {
        matches!(self.shallow_deref(term), Term::Var(_))
    }

    fn occurs(&self, var: &str, term: &Term) -> bool {
        match self.shallow_deref(term) {
            Term::Var(v) => v == var,
            Term::Compound(_, args) => {
                let args = args.clone();
                args.iter().any(|a| self.occurs(var, a))
            }
            _ => false,
        }
    }

    fn bind_var(&mut self, var: String, term: Term) {
        self.generation += 1;
        self.trail.push(Undo::Bind(var.clone()));
        self.bind.insert(var, term);
    }

    /// Unify two terms; the mgu is composed into the substitution, and
    /// numeric rows and pending disequalities are re-checked.  The store
    /// is unchanged on failure (occurs-check failures included).
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let mark = self.mark();
        let trail_before = self.trail.len();
        if self.unify_walk(a, b) {
            let mut touched: Vec<String> = Vec::new();
            for undo in &self.trail[trail_before..] {
                if let Undo::Bind(v) = undo {
                    if !touched.contains(v) {
                        touched.push(v.clone());
                    }
                }
            }
            if self.recheck(&touched) {
                return true;
            }
        }
        self.undo_to(mark);
        false
    }

    fn unify_walk(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.shallow_deref(a).clone();
        let b = self.shallow_deref(b).clone();
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if self.occurs(&x, &t) {
                    return false;
                }
                self.bind_var(x, t);
                true
            }
            (Term::Rat(p), Term::Rat(q)) => p == q,
            (Term::Const(m), Term::Const(n)) => m == n,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify_walk(x, y))
            }
            _ => false,
        }
    }

    /// Add any constraint atom; `false` means inconsistent and the store
    /// is unchanged.
    pub fn add_constraint(&mut self, c: &ConstraintAtom) -> bool {
        match c {
            ConstraintAtom::Herb { eq: true, lhs, rhs } => self.unify(&lhs.clone(), &rhs.clone()),
            ConstraintAtom::Herb { eq: false, lhs, rhs } => {
                self.add_diff(&lhs.clone(), &rhs.clone())
            }
            ConstraintAtom::Num { op, lhs, rhs } => self.add_num(*op, lhs, rhs),
        }
    }

    pub fn add_num(&mut self, op: NumOp, lhs: &LinExpr, rhs: &LinExpr) -> bool {
        let Some(expr) = self.canon_expr(&lhs.sub(rhs)) else { return false };
        if expr.is_constant() {
            use num_traits::Signed;
            let k = &expr.constant;
            return match op {
                NumOp::Lt => k.is_negative(),
                NumOp::Gt => k.is_positive(),
                NumOp::Le => !k.is_positive(),
                NumOp::Ge => !k.is_negative(),
                NumOp::Eq => k.is_zero(),
                NumOp::Ne => !k.is_zero(),
            };
        }
        // Constraints the store already entails add no information and
        // must not register as news (the forall carving relies on that).
        if self.entails(&ConstraintAtom::Num { op, lhs: expr.clone(), rhs: LinExpr::constant(rat_int(0)) }) {
            return true;
        }
        let mark = self.mark();
        let touched = expr.vars();
        match op {
            NumOp::Lt => self.push_row(expr, Rel::Lt),
            NumOp::Gt => self.push_row(expr.scale(&rat_int(-1)), Rel::Lt),
            NumOp::Le => self.push_row(expr, Rel::Le),
            NumOp::Ge => self.push_row(expr.scale(&rat_int(-1)), Rel::Le),
            NumOp::Eq => self.push_row(expr, Rel::Eq),
            NumOp::Ne => {
                self.trail.push(Undo::Neq);
                self.neqs.push(expr);
            }
        }
        if self.recheck(&touched) {
            true
        } else {
            self.undo_to(mark);
            false
        }
    }

    fn push_row(&mut self, expr: LinExpr, rel: Rel) {
        self.generation += 1;
        self.trail.push(Undo::Row);
        self.rows.push((expr, rel));
    }

    /// Record a disequality; it is re-examined on every later
    /// instantiation.  Ground-vs-ground cases resolve immediately and a
    /// pending duplicate is not recorded twice.
    pub fn add_diff(&mut self, lhs: &Term, rhs: &Term) -> bool {
        let l = self.resolve(lhs);
        let r = self.resolve(rhs);
        match self.decide(&l, &r) {
            Cmp::Equal => false,
            Cmp::Diff => true,
            Cmp::Maybe => {
                let dup = self.diseqs.iter().any(|(a, b)| {
                    let (a, b) = (self.resolve(a), self.resolve(b));
                    (a == l && b == r) || (a == r && b == l)
                });
                if !dup {
                    self.trail.push(Undo::Diseq);
                    self.diseqs.push((l, r));
                }
                true
            }
        }
    }

    /// Can the two (resolved) terms still be equal, must they be, or is
    /// it open?  Consults the numeric rows for variable/number pairs.
    fn decide(&self, l: &Term, r: &Term) -> Cmp {
        if l == r {
            return Cmp::Equal;
        }
        let numeric_side =
            |t: &Term| matches!(t, Term::Var(_) | Term::Rat(_));
        if numeric_side(l) && numeric_side(r) {
            let le = self.term_expr(l);
            let re = self.term_expr(r);
            let diff = le.sub(&re);
            if !diff.is_constant() {
                if let Some(all_rows) = self.canon_rows() {
                    // A variable no row mentions is numerically free, so
                    // the pair can always still disagree.
                    let unconstrained = diff.terms.iter().any(|(v, _)| {
                        !all_rows.iter().any(|row| row.coeff_of(v).is_some())
                    });
                    if unconstrained {
                        return Cmp::Maybe;
                    }
                    let rows = self.component_rows(all_rows, &diff.vars());
                    if fm::entails_zero(&rows, &diff) {
                        return Cmp::Equal;
                    }
                    let mut sys = rows;
                    sys.push(CanonRow::new(diff, Rel::Eq));
                    if !fm::sat(&sys) {
                        return Cmp::Diff;
                    }
                }
            }
            if l.is_var() || r.is_var() {
                return Cmp::Maybe;
            }
            return Cmp::Diff; // distinct rationals
        }
        match (l, r) {
            (Term::Var(_), _) | (_, Term::Var(_)) => Cmp::Maybe,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return Cmp::Diff;
                }
                let mut all_equal = true;
                for (x, y) in xs.iter().zip(ys.iter()) {
                    match self.decide(x, y) {
                        Cmp::Diff => return Cmp::Diff,
                        Cmp::Maybe => all_equal = false,
                        Cmp::Equal => {}
                    }
                }
                if all_equal {
                    Cmp::Equal
                } else {
                    Cmp::Maybe
                }
            }
            // Distinct constants, or mixed kinds: unique names.
            _ => Cmp::Diff,
        }
    }

    fn term_expr(&self, t: &Term) -> LinExpr {
        match t {
            Term::Rat(q) => LinExpr::constant(q.clone()),
            Term::Var(v) => LinExpr::var(v.clone()),
            _ => unreachable!("numeric side is a variable or rational"),
        }
    }

    /// The semantic content of the store (cache state aside), for
    /// restore checks in tests.
    pub fn fingerprint(&self) -> String {
        let mut bind: Vec<String> =
            self.bind.iter().map(|(v, t)| format!("{v}={t}")).collect();
        bind.sort();
        format!(
            "bind:{bind:?} rows:{:?} neqs:{:?} diseqs:{:?}",
            self.rows, self.neqs, self.diseqs
        )
    }

    /// How a disequality between two terms can be satisfied: trivially,
    /// not at all, or through one of several primitive disagreement
    /// obligations (in argument order).  The engine turns multi-way
    /// outcomes into choice points.
    pub fn diseq_branches(&self, lhs: &Term, rhs: &Term) -> DiseqBranches {
        let l = self.resolve(lhs);
        let r = self.resolve(rhs);
        match self.decide(&l, &r) {
            Cmp::Equal => DiseqBranches::Fail,
            Cmp::Diff => DiseqBranches::True,
            Cmp::Maybe => {
                let mut pairs = Vec::new();
                self.disagreement_pairs(&l, &r, &mut pairs);
                DiseqBranches::Branches(pairs)
            }
        }
    }

    /// Argument pairs that could still disagree, recursing through
    /// compound spines.
    fn disagreement_pairs(&self, l: &Term, r: &Term, out: &mut Vec<(Term, Term)>) {
        match (l, r) {
            (Term::Compound(f, xs), Term::Compound(g, ys))
                if f == g && xs.len() == ys.len() =>
            {
                for (x, y) in xs.iter().zip(ys.iter()) {
                    if self.decide(x, y) == Cmp::Maybe {
                        self.disagreement_pairs(x, y, out);
                    }
                }
            }
            _ => out.push((l.clone(), r.clone())),
        }
    }

    /// Rows with current bindings substituted in; `None` when a row
    /// variable is bound to a non-numeric term.  Cached per store
    /// generation: most operations on an unchanged store reuse it.
    pub fn canon_rows(&self) -> Option<Vec<CanonRow>> {
        if let Some((generation, cached)) = self.canon_cache.borrow().as_ref() {
            if *generation == self.generation {
                return cached.clone();
            }
        }
        let computed = self.canon_rows_uncached();
        *self.canon_cache.borrow_mut() = Some((self.generation, computed.clone()));
        computed
    }

    fn canon_rows_uncached(&self) -> Option<Vec<CanonRow>> {
        let mut out = Vec::with_capacity(self.rows.len());
        for (expr, rel) in &self.rows {
            out.push(CanonRow::new(self.canon_expr(expr)?, *rel));
        }
        Some(out)
    }

    fn canon_expr(&self, expr: &LinExpr) -> Option<LinExpr> {
        let mut out = LinExpr::constant(expr.constant.clone());
        for (v, c) in &expr.terms {
            match self.shallow_deref(&Term::Var(v.clone())) {
                Term::Var(root) => out.add_term(root, c.clone()),
                Term::Rat(q) => out.constant += c * q.clone(),
                _ => return None,
            }
        }
        Some(out)
    }

    /// Consistency after a change touching the given variables.  Rows in
    /// other connected components were satisfiable before and cannot have
    /// been affected, so the Fourier-Motzkin work stays local.
    fn recheck(&self, touched: &[String]) -> bool {
        let mut roots: Vec<String> = touched
            .iter()
            .flat_map(|v| match self.shallow_deref(&Term::Var(v.clone())) {
                Term::Var(root) => vec![root.clone()],
                Term::Rat(_) => vec![v.clone()],
                t => {
                    let t = t.clone();
                    t.vars()
                }
            })
            .collect();
        // A binding substitutes the variable out of the canonical rows;
        // the rows it used to appear in land in other variables'
        // components, which must now be re-checked too.
        for (expr, _) in &self.rows {
            if expr.terms.iter().any(|(v, _)| touched.contains(v)) {
                if let Some(canon) = self.canon_expr(expr) {
                    for (v, _) in &canon.terms {
                        if !roots.contains(v) {
                            roots.push(v.clone());
                        }
                    }
                }
            }
        }
        for expr in &self.neqs {
            if expr.terms.iter().any(|(v, _)| touched.contains(v)) {
                if let Some(canon) = self.canon_expr(expr) {
                    for (v, _) in &canon.terms {
                        if !roots.contains(v) {
                            roots.push(v.clone());
                        }
                    }
                }
            }
        }
        let Some(all_rows) = self.canon_rows() else { return false };
        // Bindings can ground a row outright; those no longer belong to
        // any component and must be checked directly.
        if all_rows.iter().any(|r| r.is_ground() && !r.ground_holds()) {
            return false;
        }
        let rows = self.component_rows(all_rows, &roots);
        if !fm::sat(&rows) {
            return false;
        }
        let in_component = |e: &LinExpr, rows: &[CanonRow]| {
            e.terms.iter().any(|(v, _)| {
                roots.contains(v) || rows.iter().any(|r| r.coeff_of(v).is_some())
            })
        };
        for neq in &self.neqs {
            let Some(e) = self.canon_expr(neq) else { return false };
            if e.is_constant() {
                if e.constant.is_zero() {
                    return false;
                }
            } else if in_component(&e, &rows) && fm::entails_zero(&rows, &e) {
                return false;
            }
        }
        for (l, r) in &self.diseqs {
            let l = self.resolve(l);
            let r = self.resolve(r);
            let relevant = l.vars().iter().chain(r.vars().iter()).any(|v| roots.contains(v))
                || l.vars().is_empty() && r.vars().is_empty();
            if relevant && self.decide(&l, &r) == Cmp::Equal {
                return false;
            }
        }
        true
    }

    /// True iff every solution of the store satisfies `c`.
    pub fn entails(&self, c: &ConstraintAtom) -> bool {
        match c {
            ConstraintAtom::Num { op, lhs, rhs } => {
                let Some(expr) = self.canon_expr(&lhs.sub(rhs)) else { return false };
                let Some(all_rows) = self.canon_rows() else { return false };
                let rows = self.component_rows(all_rows, &expr.vars());
                match op {
                    NumOp::Lt => fm::entails_row(&rows, &CanonRow::new(expr, Rel::Lt)),
                    NumOp::Gt => {
                        fm::entails_row(&rows, &CanonRow::new(expr.scale(&rat_int(-1)), Rel::Lt))
                    }
                    NumOp::Le => fm::entails_row(&rows, &CanonRow::new(expr, Rel::Le)),
                    NumOp::Ge => {
                        fm::entails_row(&rows, &CanonRow::new(expr.scale(&rat_int(-1)), Rel::Le))
                    }
                    NumOp::Eq => fm::entails_zero(&rows, &expr),
                    NumOp::Ne => {
                        if expr.is_constant() {
                            return !expr.constant.is_zero();
                        }
                        let mut sys = rows;
                        sys.push(CanonRow::new(expr, Rel::Eq));
                        !fm::sat(&sys)
                    }
                }
            }
            ConstraintAtom::Herb { eq, lhs, rhs } => {
                let l = self.resolve(lhs);
                let r = self.resolve(rhs);
                match self.decide(&l, &r) {
                    Cmp::Equal => *eq,
                    Cmp::Diff => !*eq,
                    Cmp::Maybe => false,
                }
            }
        }
    }

    /// The value a variable is fixed to, if the store pins it.
    pub fn pinned(&self, var: &str) -> Option<Rat> {
        match self.shallow_deref(&Term::Var(var.to_string())) {
            Term::Rat(q) => Some(q.clone()),
            Term::Var(root) => {
                let root = root.clone();
                let rows = self.component_rows(self.canon_rows()?, std::slice::from_ref(&root));
                let pt = fm::point(&rows)?;
                let q = pt.get(&root)?.clone();
                let expr = LinExpr::var(root).sub(&LinExpr::constant(q.clone()));
                if fm::entails_zero(&rows, &expr) {
                    return Some(q);
                }
                None
            }
            _ => None,
        }
    }

    /// Quantifier-eliminated constraints mentioning only `vars`
    /// (Fourier-Motzkin over the numeric part), plus the disequalities
    /// touching them.  The result is solution-set-equivalent to
    /// projecting the store onto `vars`.
    pub fn project(&self, vars: &[String]) -> Vec<ConstraintAtom> {
        let mut out = Vec::new();
        let roots: Vec<String> = vars
            .iter()
            .filter_map(|v| match self.shallow_deref(&Term::Var(v.clone())) {
                Term::Var(root) => Some(root.clone()),
                _ => None,
            })
            .collect();
        let mut rows = match self.canon_rows() {
            Some(rows) => self.component_rows(rows, &roots),
            None => Vec::new(),
        };
        // A disequality pinned against a non-strict bound makes the bound
        // strict; fold that in before eliminating, or the projection
        // comes out too wide.
        for neq in &self.neqs {
            let Some(e) = self.canon_expr(neq) else { continue };
            if e.is_constant() {
                continue;
            }
            if fm::entails_row(&rows, &CanonRow::new(e.clone(), Rel::Le)) {
                rows.push(CanonRow::new(e, Rel::Lt));
            } else {
                let neg = e.scale(&rat_int(-1));
                if fm::entails_row(&rows, &CanonRow::new(neg.clone(), Rel::Le)) {
                    rows.push(CanonRow::new(neg, Rel::Lt));
                }
            }
        }
        if let Some(projected) = fm::project(&rows, &roots) {
            for row in &projected {
                out.push(row_to_atom(row));
            }
        }
        for neq in &self.neqs {
            let Some(e) = self.canon_expr(neq) else { continue };
            if e.is_constant() || !e.vars().iter().all(|v| roots.contains(v)) {
                continue;
            }
            // Skip numeric disequalities the rows already decide.
            let mut sys = rows.clone();
            sys.push(CanonRow::new(e.clone(), Rel::Eq));
            if !fm::sat(&sys) {
                continue;
            }
            out.push(row_neq_to_atom(&e));
        }
        for (l, r) in &self.diseqs {
            let l = self.resolve(l);
            let r = self.resolve(r);
            if self.decide(&l, &r) != Cmp::Maybe {
                continue;
            }
            let mentions = |t: &Term| t.vars().iter().any(|v| roots.contains(v));
            if !mentions(&l) && !mentions(&r) {
                continue;
            }
            let (l, r) = if !l.is_var() && r.is_var() { (r, l) } else { (l, r) };
            let atom = ConstraintAtom::herb_ne(l, r);
            if !out.contains(&atom) {
                out.push(atom);
            }
        }
        out
    }

    /// Rows transitively connected to `vars` through shared variables;
    /// the rest cannot contribute to a projection onto `vars`.
    fn component_rows(&self, rows: Vec<CanonRow>, vars: &[String]) -> Vec<CanonRow> {
        let mut reached: Vec<String> = vars.to_vec();
        let mut included = vec![false; rows.len()];
        loop {
            let mut changed = false;
            for (i, row) in rows.iter().enumerate() {
                if included[i] {
                    continue;
                }
                if row.expr.terms.iter().any(|(v, _)| reached.contains(v)) {
                    included[i] = true;
                    changed = true;
                    for (v, _) in &row.expr.terms {
                        if !reached.contains(v) {
                            reached.push(v.clone());
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        rows.into_iter().zip(included).filter(|(_, inc)| *inc).map(|(r, _)| r).collect()
    }
}

/// Present `expr REL 0` with positive terms on the left.
fn row_to_atom(row: &CanonRow) -> ConstraintAtom {
    use num_traits::Signed;
    let has_positive = row.expr.terms.iter().any(|(_, c)| c.is_positive());
    let (lhs_expr, flip) = if has_positive {
        let mut lhs = LinExpr::constant(rat_int(0));
        for (v, c) in &row.expr.terms {
            if c.is_positive() {
                lhs.add_term(v, c.clone());
            }
        }
        (lhs, false)
    } else {
        let mut lhs = LinExpr::constant(rat_int(0));
        for (v, c) in &row.expr.terms {
            lhs.add_term(v, -c.clone());
        }
        (lhs, true)
    };
    let rhs = if flip { lhs_expr.add(&row.expr) } else { lhs_expr.sub(&row.expr) };
    let op = match (row.rel, flip) {
        (Rel::Lt, false) => NumOp::Lt,
        (Rel::Lt, true) => NumOp::Gt,
        (Rel::Le, false) => NumOp::Le,
        (Rel::Le, true) => NumOp::Ge,
        (Rel::Eq, _) => NumOp::Eq,
    };
    ConstraintAtom::num(op, lhs_expr, rhs)
}

fn row_neq_to_atom(expr: &LinExpr) -> ConstraintAtom {
    use num_traits::Signed;
    let mut lhs = LinExpr::constant(rat_int(0));
    let mut any_positive = false;
    for (v, c) in &expr.terms {
        if c.is_positive() {
            lhs.add_term(v, c.clone());
            any_positive = true;
        }
    }
    if !any_positive {
        for (v, c) in &expr.terms {
            lhs.add_term(v, -c.clone());
        }
        let rhs = lhs.add(expr);
        return ConstraintAtom::num(NumOp::Ne, lhs, rhs);
    }
    let rhs = lhs.sub(expr);
    ConstraintAtom::num(NumOp::Ne, lhs, rhs)
}
