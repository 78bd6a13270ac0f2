//! Top-down, goal-driven evaluation over the original program, its
//! dual, and the consistency check.
//!
//! Calls resolve against program clauses, default-negated calls against
//! the dual rules.  The call ancestry decides loops by the parity of
//! evaluation-context switches between a call and its variant ancestor
//! (negated auxiliaries inside an already-negative context switch
//! nothing): an odd count fails, an even nonzero count succeeds
//! coinductively, and at zero a positive call fails for lack of support
//! while a negated one succeeds - a failure may assume its own failure.
//! A coinductive assumption taints everything that builds on it through
//! positive links, and a literal whose own assumption reaches it that
//! way is rejected as unfounded.  Completed literals form the candidate
//! model; calls subsumed by it succeed at once, calls whose complement
//! is in it fail, which keeps the consistency-check phase aligned with
//! the candidate it is checking.
//!
//! `forall(V, G)` proves `G` for every value of `V`: solve `G` once,
//! read the constraints the solution put on `V`, and re-solve under each
//! negated region until the domain is exhausted.  Constraints a region
//! places on outer variables stay in force, so answers accumulate them.

use std::collections::{HashMap, HashSet};
use std::sync::mpsc;
use std::sync::Arc;

use crate::clpq::negate::negate_constraint;
use crate::clpq::{DiseqBranches, Store};
use crate::dualgen::{build_dep_graph, generate_nmr_check, synthesize_dual, NmrCheck};
use crate::syntax::{
    expand_abducibles, normalize, rename_body_item, rename_term, BodyItem, ConstraintAtom,
    LinExpr, Literal, NormalizeError, PredKey, Program, Rule, Term,
};

#[derive(Clone, Debug)]
pub struct CompileError {
    pub msg: String,
}

impl std::fmt::Display for CompileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.msg)
    }
}

impl std::error::Error for CompileError {}

impl From<NormalizeError> for CompileError {
    fn from(e: NormalizeError) -> Self {
        CompileError { msg: e.msg }
    }
}

/// A program compiled for evaluation: normalized rules indexed by head,
/// the synthesized dual indexed the same way, and the consistency check.
/// Immutable; share freely between concurrent queries.
#[derive(Clone, Debug)]
pub struct Compiled {
    /// Normalized source program (after abducible expansion).
    pub program: Program,
    /// The dual rules, for inspection and `--dump-dual`.
    pub dual_rules: Vec<Rule>,
    /// Consistency-check rules plus entry goal.
    pub nmr: NmrCheck,
    clauses: HashMap<PredKey, Vec<Rule>>,
    duals: HashMap<PredKey, Vec<Rule>>,
    /// Generated predicate names: hidden from printed models.
    hidden: HashSet<String>,
}

impl Compiled {
    pub fn is_hidden(&self, name: &str) -> bool {
        self.hidden.contains(name)
    }
}

/// Run the whole pipeline: abducible expansion, normalization, dual
/// synthesis, and consistency-check generation.
pub fn compile(program: &Program) -> Result<Compiled, CompileError> {
    let (expanded, flips) = expand_abducibles(program)?;
    let normalized = normalize(&expanded);
    let dual_rules = synthesize_dual(&normalized);
    let graph = build_dep_graph(&normalized);
    let nmr = generate_nmr_check(&normalized, &graph);

    let source_names: HashSet<String> =
        normalized.pred_keys().into_iter().map(|k| k.name).collect();
    let mut hidden: HashSet<String> = flips.into_iter().collect();

    let mut clauses: HashMap<PredKey, Vec<Rule>> = HashMap::new();
    for rule in normalized.rules.iter().filter(|r| r.head.is_some()) {
        let head = rule.head.as_ref().unwrap();
        clauses.entry(head.key()).or_default().push(rule.clone());
    }
    clauses
        .entry(nmr.entry_rule.head.as_ref().unwrap().key())
        .or_default()
        .push(nmr.entry_rule.clone());
    hidden.insert(nmr.entry.key().name);

    let mut duals: HashMap<PredKey, Vec<Rule>> = HashMap::new();
    for rule in dual_rules.iter().chain(nmr.check_rules.iter()) {
        let head = rule.head.as_ref().unwrap();
        let key = head.key();
        if !source_names.contains(&key.name) {
            hidden.insert(key.name.clone());
        }
        duals.entry(key).or_default().push(rule.clone());
    }
    // Auxiliary predicates referenced but left clause-less (the dual of
    // a fact) must resolve to failure, not to the undefined default.
    let mut ensure_keys: Vec<PredKey> = Vec::new();
    for rule in dual_rules.iter().chain(nmr.check_rules.iter()).chain([&nmr.entry_rule]) {
        for item in &rule.body {
            collect_naf_keys(item, &mut ensure_keys);
        }
    }
    for key in ensure_keys {
        if !source_names.contains(&key.name) {
            hidden.insert(key.name.clone());
            duals.entry(key).or_default();
        }
    }

    Ok(Compiled { program: normalized, dual_rules, nmr, clauses, duals, hidden })
}

fn collect_naf_keys(item: &BodyItem, out: &mut Vec<PredKey>) {
    match item {
        BodyItem::Lit(l) if l.naf => out.push(l.key()),
        BodyItem::Forall { inner, .. } => collect_naf_keys(inner, out),
        _ => {}
    }
}

#[derive(Clone, Debug)]
pub struct SolveOpts {
    /// 0 enumerates all answers.
    pub max_answers: usize,
    /// Call-depth bound; exceeding it makes the result "unknown" rather
    /// than silently incomplete.
    pub depth: Option<u32>,
    /// Evaluate the consistency check against every candidate (off is a
    /// debugging aid).
    pub run_nmr: bool,
    /// Cap on domain regions carved per forall evaluation.
    pub forall_regions: u32,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts { max_answers: 0, depth: None, run_nmr: true, forall_regions: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveError {
    /// The depth bound cut at least one branch: absence of further
    /// answers is unknown.
    DepthLimit,
    /// A forall evaluation exceeded the region cap.
    ForallBudget,
}

impl std::fmt::Display for SolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveError::DepthLimit => {
                write!(f, "depth limit exceeded: remaining answers unknown")
            }
            SolveError::ForallBudget => write!(f, "forall region budget exceeded"),
        }
    }
}

impl std::error::Error for SolveError {}

/// One literal of a partial model, with the constraints projected onto
/// its variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelLit {
    pub classical: bool,
    pub naf: bool,
    pub atom: Term,
    pub constraints: Vec<ConstraintAtom>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Bound(Term),
    /// Unbound: the projected constraints on the variable (empty means
    /// genuinely free).  `var` is the internal name the constraints use.
    Constrained { var: String, constraints: Vec<ConstraintAtom> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryBinding {
    /// The variable name as written in the query.
    pub name: String,
    pub value: Binding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JustKind {
    /// Proved by a program or dual clause.
    Clause,
    /// Assumed by coinductive success on an even loop.
    Coinduction,
    /// Subsumed by a literal already in the candidate model.
    InModel,
    /// Default negation of a predicate with no rules.
    Undefined,
    /// A fact (clause with empty body).
    Fact,
}

#[derive(Clone, Debug)]
pub struct JustNode {
    pub lit: ModelLit,
    pub kind: JustKind,
    pub children: Vec<JustNode>,
}

/// A partial stable model supporting one answer to a query.
#[derive(Clone, Debug)]
pub struct Answer {
    pub model: Vec<ModelLit>,
    pub bindings: Vec<QueryBinding>,
    pub justification: Vec<JustNode>,
}

impl Answer {
    /// Model literals that pass the program's `#show` filter (all of
    /// them when no filter was declared).  Hidden auxiliaries are
    /// already absent.
    pub fn shown_model<'a>(&'a self, compiled: &Compiled) -> Vec<&'a ModelLit> {
        let shows = &compiled.program.directives.shows;
        self.model
            .iter()
            .filter(|m| {
                if shows.is_empty() {
                    return true;
                }
                let (name, arity) = m.atom.indicator().expect("model atoms are atoms");
                shows
                    .iter()
                    .any(|s| s.classical == m.classical && s.name == name && s.arity == arity)
            })
            .collect()
    }
}

/// Lazily enumerated answers; drop it to cancel the search.
pub struct Solutions {
    rx: mpsc::Receiver<Result<Answer, SolveError>>,
    cancel: Arc<std::sync::atomic::AtomicBool>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl Iterator for Solutions {
    type Item = Result<Answer, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.rx.recv().ok()
    }
}

impl Drop for Solutions {
    fn drop(&mut self) {
        // Flag the worker down and unblock any pending send.
        let Some(handle) = self.handle.take() else { return };
        self.cancel.store(true, std::sync::atomic::Ordering::Relaxed);
        let (_, drain) = mpsc::channel();
        let rx = std::mem::replace(&mut self.rx, drain);
        drop(rx);
        let _ = handle.join();
    }
}

/// Evaluate a query, enumerating answers on demand.  The stream order
/// follows clause order and constraint-disjunct order.  A final
/// `Err(DepthLimit)` item reports that some branch was cut by the depth
/// bound.
pub fn solve(compiled: &Compiled, query: &[BodyItem], opts: &SolveOpts) -> Solutions {
    let compiled = Arc::new(compiled.clone());
    let query = query.to_vec();
    let opts = opts.clone();
    let cancel = Arc::new(std::sync::atomic::AtomicBool::new(false));
    let flag = cancel.clone();
    let (tx, rx) = mpsc::sync_channel(1);
    let handle = std::thread::Builder::new()
        .name("solver".into())
        .stack_size(256 << 20)
        .spawn(move || run_query(&compiled, &query, &opts, tx, flag))
        .expect("spawn solver thread");
    Solutions { rx, cancel, handle: Some(handle) }
}

/// Convenience wrapper collecting every answer eagerly.
pub fn solve_all(
    compiled: &Compiled,
    query: &[BodyItem],
    opts: &SolveOpts,
) -> Result<Vec<Answer>, SolveError> {
    solve(compiled, query, opts).collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flow {
    /// Keep searching alternatives.
    Continue,
    /// Unwind the whole search, keeping current state intact.
    Stop,
}

struct Ancestor {
    classical: bool,
    atom: Term,
    /// Polarity switches up to and including this call: the parity of
    /// the evaluation context its body runs in (odd = negative).
    switches: u32,
    /// Whether this call flipped the context (for restoring the count).
    flipped: bool,
}

#[derive(Clone)]
struct Record {
    classical: bool,
    naf: bool,
    atom: Term,
    /// Coinductive assumptions this literal's proof positively leans on
    /// (default-negated steps are barriers).  A proof of an atom that
    /// leans on its own assumption is unfounded.
    assumes: Vec<(bool, Term)>,
    /// Projection of the store onto the literal's variables, computed on
    /// the first subsumption test against this record.  Sound to reuse:
    /// the proof established the literal throughout this region.
    region: std::cell::OnceCell<(Term, Vec<ConstraintAtom>)>,
}

#[derive(Clone)]
struct RawNode {
    classical: bool,
    naf: bool,
    atom: Term,
    kind: JustKind,
    nmr: bool,
    assumes: Vec<(bool, Term)>,
    children: Vec<RawNode>,
}

struct State<'c> {
    compiled: &'c Compiled,
    opts: &'c SolveOpts,
    store: Store,
    model: Vec<Record>,
    ancestors: Vec<Ancestor>,
    /// Polarity switches among the in-progress ancestors.  The context
    /// is negative exactly when this is odd; dual-internal negated
    /// literals inside a negative context do not flip it, while positive
    /// literals inside a dual do.
    switches: u32,
    fresh: u64,
    truncated: bool,
    forall_blown: bool,
    in_nmr: bool,
    just_stack: Vec<Vec<RawNode>>,
    cancel: Arc<std::sync::atomic::AtomicBool>,
    trace: bool,
    calls: u64,
}

impl State<'_> {
    fn fresh_var(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("_{}{}", prefix, self.fresh)
    }
}

fn run_query(
    compiled: &Compiled,
    query: &[BodyItem],
    opts: &SolveOpts,
    tx: mpsc::SyncSender<Result<Answer, SolveError>>,
    cancel: Arc<std::sync::atomic::AtomicBool>,
) {
    let mut st = State {
        compiled,
        opts,
        store: Store::new(),
        model: Vec::new(),
        ancestors: Vec::new(),
        switches: 0,
        fresh: 0,
        truncated: false,
        forall_blown: false,
        in_nmr: false,
        just_stack: vec![Vec::new()],
        cancel,
        trace: std::env::var_os("ECSCASP_TRACE").is_some(),
        calls: 0,
    };

    // Rename query variables apart from everything else, remembering
    // the source names for the bindings.
    let mut qvars: Vec<(String, String)> = Vec::new();
    let mut fresh = 0u64;
    let renamed: Vec<BodyItem> = query
        .iter()
        .map(|item| {
            rename_body_item(item, &mut |v: &str| {
                if let Some((_, internal)) = qvars.iter().find(|(s, _)| s == v) {
                    return internal.clone();
                }
                fresh += 1;
                let internal = format!("_Q{fresh}");
                qvars.push((v.to_string(), internal.clone()));
                internal
            })
        })
        .collect();

    let mut produced = 0usize;
    let nmr_goal = BodyItem::Lit(compiled.nmr.entry.clone());
    solve_seq(&mut st, &renamed, &mut |st| {
        let passed = if st.opts.run_nmr { run_nmr(st, &nmr_goal) } else { true };
        if !passed {
            return Flow::Continue;
        }
        let answer = assemble_answer(st, &qvars);
        if tx.send(Ok(answer)).is_err() {
            return Flow::Stop;
        }
        produced += 1;
        if st.opts.max_answers > 0 && produced >= st.opts.max_answers {
            return Flow::Stop;
        }
        Flow::Continue
    });
    if st.forall_blown {
        let _ = tx.send(Err(SolveError::ForallBudget));
    } else if st.truncated {
        let _ = tx.send(Err(SolveError::DepthLimit));
    }
}

/// Evaluate the consistency check against the finished candidate: one
/// success is enough, and its effects stay with the candidate.
fn run_nmr(st: &mut State, goal: &BodyItem) -> bool {
    let was = st.in_nmr;
    st.in_nmr = true;
    let ok = prove_once(st, goal);
    st.in_nmr = was;
    ok
}

/// Prove a goal once, committing to its first solution (effects kept).
fn prove_once(st: &mut State, goal: &BodyItem) -> bool {
    let mut ok = false;
    let _ = solve_item(st, goal, &mut |_st| {
        ok = true;
        Flow::Stop
    });
    ok
}

fn solve_seq(st: &mut State, items: &[BodyItem], k: &mut dyn FnMut(&mut State) -> Flow) -> Flow {
    match items.split_first() {
        None => k(st),
        Some((first, rest)) => solve_item(st, first, &mut |st| solve_seq(st, rest, k)),
    }
}

fn solve_item(st: &mut State, item: &BodyItem, k: &mut dyn FnMut(&mut State) -> Flow) -> Flow {
    match item {
        BodyItem::Con(ConstraintAtom::Herb { eq: false, lhs, rhs }) => {
            // A disequality between compounds is a disjunction over the
            // positions that can disagree: one choice point per pair.
            match st.store.diseq_branches(lhs, rhs) {
                DiseqBranches::Fail => Flow::Continue,
                DiseqBranches::True => k(st),
                DiseqBranches::Branches(pairs) => {
                    for (l, r) in pairs {
                        let mark = st.store.mark();
                        if st.store.add_diff(&l, &r) && k(st) == Flow::Stop {
                            return Flow::Stop;
                        }
                        st.store.undo_to(mark);
                    }
                    Flow::Continue
                }
            }
        }
        BodyItem::Con(c) => {
            let mark = st.store.mark();
            if st.store.add_constraint(c) && k(st) == Flow::Stop {
                return Flow::Stop;
            }
            st.store.undo_to(mark);
            Flow::Continue
        }
        BodyItem::Forall { var, inner } => {
            let mark = st.store.mark();
            let model_mark = st.model.len();
            let just_mark = st.just_stack.last().map(|f| f.len()).unwrap_or(0);
            let mut budget = st.opts.forall_regions;
            if eval_forall(st, var, inner, &[], &mut budget) && k(st) == Flow::Stop {
                return Flow::Stop;
            }
            st.store.undo_to(mark);
            st.model.truncate(model_mark);
            if let Some(frame) = st.just_stack.last_mut() {
                frame.truncate(just_mark);
            }
            Flow::Continue
        }
        BodyItem::Lit(l) => solve_literal(st, l, k),
    }
}

/// Two atoms are variants iff a bijective variable renaming maps one to
/// the other.
fn variant(a: &Term, b: &Term) -> bool {
    fn walk(
        a: &Term,
        b: &Term,
        fwd: &mut HashMap<String, String>,
        bwd: &mut HashMap<String, String>,
    ) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let f = fwd.entry(x.clone()).or_insert_with(|| y.clone());
                let g = bwd.entry(y.clone()).or_insert_with(|| x.clone());
                f == y && g == x
            }
            (Term::Rat(p), Term::Rat(q)) => p == q,
            (Term::Const(m), Term::Const(n)) => m == n,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| walk(x, y, fwd, bwd))
            }
            _ => false,
        }
    }
    walk(a, b, &mut HashMap::new(), &mut HashMap::new())
}

/// One-way match of a pattern onto a term (no unification: pattern
/// variables bind, everything else must coincide structurally).
fn match_onto(pat: &Term, term: &Term, subeq: &mut HashMap<String, Term>) -> bool {
    match (pat, term) {
        (Term::Var(v), t) => match subeq.get(v) {
            Some(bound) => bound == t,
            None => {
                subeq.insert(v.clone(), t.clone());
                true
            }
        },
        (Term::Rat(p), Term::Rat(q)) => p == q,
        (Term::Const(m), Term::Const(n)) => m == n,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_onto(x, y, subeq))
        }
        _ => false,
    }
}

fn subst_term(t: &Term, subst: &HashMap<String, Term>) -> Term {
    match t {
        Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Compound(f, args) => {
            Term::Compound(f.clone(), args.iter().map(|a| subst_term(a, subst)).collect())
        }
        other => other.clone(),
    }
}

fn subst_linexpr(e: &LinExpr, subst: &HashMap<String, Term>) -> Option<LinExpr> {
    let mut out = LinExpr::constant(e.constant.clone());
    for (v, c) in &e.terms {
        match subst.get(v) {
            None => out.add_term(v, c.clone()),
            Some(Term::Var(w)) => out.add_term(w, c.clone()),
            Some(Term::Rat(q)) => out.constant += c * q,
            Some(_) => return None,
        }
    }
    Some(out)
}

fn subst_constraint(c: &ConstraintAtom, subst: &HashMap<String, Term>) -> Option<ConstraintAtom> {
    Some(match c {
        ConstraintAtom::Num { op, lhs, rhs } => ConstraintAtom::Num {
            op: *op,
            lhs: subst_linexpr(lhs, subst)?,
            rhs: subst_linexpr(rhs, subst)?,
        },
        ConstraintAtom::Herb { eq, lhs, rhs } => ConstraintAtom::Herb {
            eq: *eq,
            lhs: subst_term(lhs, subst),
            rhs: subst_term(rhs, subst),
        },
    })
}

/// Does an already-completed literal of the candidate model decide this
/// call?  `Some(true)` when a record subsumes it (success), `Some(false)`
/// when a record subsumes its complement (failure).
fn model_hit(st: &State, lit: &Literal, atom: &Term) -> Option<(bool, usize)> {
    let (name, arity) = atom.indicator()?;
    for (idx, rec) in st.model.iter().enumerate() {
        if rec.classical != lit.classical {
            continue;
        }
        match rec.atom.indicator() {
            Some((n, a)) if n == name && a == arity => {}
            _ => continue,
        }
        let (rec_atom, region) = rec.region.get_or_init(|| {
            let resolved = st.store.resolve(&rec.atom);
            let vars = resolved.vars();
            let cons = if vars.is_empty() { Vec::new() } else { st.store.project(&vars) };
            (resolved, cons)
        });
        let mut subst = HashMap::new();
        if !match_onto(rec_atom, atom, &mut subst) {
            continue;
        }
        // The record covers the call only if the call's constraints land
        // inside the region the record was proved for.
        let covered = region.iter().all(|c| match subst_constraint(c, &subst) {
            Some(mapped) => st.store.entails(&mapped),
            None => false,
        });
        if covered {
            return Some((rec.naf == lit.naf, idx));
        }
    }
    None
}

fn solve_literal(st: &mut State, lit: &Literal, k: &mut dyn FnMut(&mut State) -> Flow) -> Flow {
    if st.cancel.load(std::sync::atomic::Ordering::Relaxed) {
        return Flow::Stop;
    }
    st.calls += 1;
    if st.trace {
        let atom = st.store.resolve(&lit.atom);
        eprintln!(
            "[{:6}] {:width$}{}{}{}",
            st.calls,
            "",
            if lit.naf { "not " } else { "" },
            if lit.classical { "-" } else { "" },
            atom,
            width = st.ancestors.len().min(40)
        );
    }
    if let Some(limit) = st.opts.depth {
        if st.ancestors.len() as u32 >= limit {
            st.truncated = true;
            return Flow::Continue;
        }
    }
    solve_literal_inner(st, lit, k)
}

fn solve_literal_inner(
    st: &mut State,
    lit: &Literal,
    k: &mut dyn FnMut(&mut State) -> Flow,
) -> Flow {
    let atom = st.store.resolve(&lit.atom);
    let key = lit.key();
    let hidden = st.compiled.is_hidden(&key.name);

    // Loop decisions against the in-progress ancestors (nearest first).
    let current = st.switches + (((st.switches % 2 == 1) != lit.naf) as u32);
    for i in (0..st.ancestors.len()).rev() {
        if st.ancestors[i].classical != lit.classical {
            continue;
        }
        let anc_atom = st.store.resolve(&st.ancestors[i].atom);
        if anc_atom.indicator() != atom.indicator() || !variant(&anc_atom, &atom) {
            continue;
        }
        let intervening = current - st.ancestors[i].switches;
        if st.trace {
            eprintln!(
                "        loop: {} vs ancestor {} intervening {}",
                atom, anc_atom, intervening
            );
        }
        if intervening == 0 {
            if lit.naf {
                // A failure assuming its own failure: the underlying
                // positive dependency is unfounded, so the negation
                // holds coinductively.
                return exit_success(st, lit, JustKind::Coinduction, Vec::new(), hidden, k);
            }
            // Positive loop: no well-founded support.
            return Flow::Continue;
        }
        if intervening % 2 == 1 {
            // Odd loop: the call contradicts its ancestor.
            return Flow::Continue;
        }
        // Even loop: coinductive success; the assumption joins the model
        // and taints everything that positively builds on it.
        let assumes =
            if lit.naf { Vec::new() } else { vec![(lit.classical, atom.clone())] };
        return exit_success(st, lit, JustKind::Coinduction, assumes, hidden, k);
    }

    // Already decided by the candidate model?
    if !hidden {
        match model_hit(st, lit, &atom) {
            Some((true, idx)) => {
                if st.trace {
                    eprintln!("        model hit: {}", atom);
                }
                // reusing a record inherits what it leans on
                let assumes = st.model[idx].assumes.clone();
                return exit_success(st, lit, JustKind::InModel, assumes, hidden, k);
            }
            Some((false, _)) => {
                if st.trace {
                    eprintln!("        model complement: {}", atom);
                }
                return Flow::Continue;
            }
            None => {}
        }
    }

    let clauses = if lit.naf {
        match st.compiled.duals.get(&key) {
            None => {
                // Used but never defined: the negation holds outright.
                return exit_success(st, lit, JustKind::Undefined, Vec::new(), hidden, k);
            }
            Some(cs) => cs,
        }
    } else {
        match st.compiled.clauses.get(&key) {
            None => return Flow::Continue,
            Some(cs) => cs,
        }
    };

    let flipped = (st.switches % 2 == 1) != lit.naf;
    st.switches += flipped as u32;
    st.ancestors.push(Ancestor {
        classical: lit.classical,
        atom: lit.atom.clone(),
        switches: st.switches,
        flipped,
    });
    st.just_stack.push(Vec::new());

    let mut flow = Flow::Continue;
    for clause in clauses {
        let mark = st.store.mark();
        let model_mark = st.model.len();
        let (head_args, body) = rename_clause(st, clause);
        let mut bound = true;
        for (call_arg, head_arg) in atom.args().iter().zip(head_args.iter()) {
            if !st.store.unify(head_arg, call_arg) {
                bound = false;
                break;
            }
        }
        if bound {
            let kind = if body.is_empty() { JustKind::Fact } else { JustKind::Clause };
            let body_flow =
                solve_seq(st, &body, &mut |st| exit_call_success(st, lit, kind, hidden, k));
            if body_flow == Flow::Stop {
                flow = Flow::Stop;
                break;
            }
        }
        st.store.undo_to(mark);
        st.model.truncate(model_mark);
        if let Some(frame) = st.just_stack.last_mut() {
            frame.clear();
        }
    }

    if flow == Flow::Continue {
        st.just_stack.pop();
        let popped = st.ancestors.pop().expect("ancestor present");
        st.switches -= popped.flipped as u32;
    }
    flow
}

/// Success bookkeeping for a clause-proved call: the finished node
/// absorbs the children gathered during the body, the ancestor entry is
/// popped for the continuation, and the literal joins the model.
fn exit_call_success(
    st: &mut State,
    lit: &Literal,
    kind: JustKind,
    hidden: bool,
    k: &mut dyn FnMut(&mut State) -> Flow,
) -> Flow {
    // What this proof positively leans on: the union over the body,
    // with default-negated steps acting as barriers (an assumption may
    // legitimately justify failures below them).
    let assumes: Vec<(bool, Term)> = if lit.naf {
        Vec::new()
    } else {
        let frame = st.just_stack.last().expect("call frame present");
        let mut union: Vec<(bool, Term)> = Vec::new();
        for node in frame.iter().filter(|n| !n.naf) {
            for a in &node.assumes {
                if !union.contains(a) {
                    union.push(a.clone());
                }
            }
        }
        union
    };
    // A positive literal leaning on its own assumption is unfounded.
    if !lit.naf {
        let atom = st.store.resolve(&lit.atom);
        if assumes
            .iter()
            .any(|(c, t)| *c == lit.classical && variant(&st.store.resolve(t), &atom))
        {
            return Flow::Continue;
        }
    }
    let frame = st.just_stack.pop().expect("call frame present");
    let ancestor = st.ancestors.pop().expect("ancestor present");
    st.switches -= ancestor.flipped as u32;

    let rec_mark = st.model.len();
    st.model.push(Record {
        classical: lit.classical,
        naf: lit.naf,
        atom: lit.atom.clone(),
        assumes: assumes.clone(),
        region: std::cell::OnceCell::new(),
    });
    // Auxiliary predicates stay out of the justification: their children
    // flow into the nearest user-level node.
    let parent_mark = st.just_stack.last().map(|p| p.len()).unwrap_or(0);
    {
        if let Some(parent) = st.just_stack.last_mut() {
            if hidden {
                // Splicing hands the children to the caller's frame; a
                // default-negated step stays a barrier for assumptions
                // even when its own node is elided.
                parent.extend(frame.iter().cloned().map(|mut n| {
                    if lit.naf {
                        n.assumes = Vec::new();
                    }
                    n
                }));
            } else {
                parent.push(RawNode {
                    classical: lit.classical,
                    naf: lit.naf,
                    atom: st.store.resolve(&lit.atom),
                    kind,
                    nmr: st.in_nmr,
                    assumes,
                    children: frame.clone(),
                });
            }
        }
    }

    let flow = k(st);
    if flow == Flow::Stop {
        return Flow::Stop;
    }

    if let Some(parent) = st.just_stack.last_mut() {
        parent.truncate(parent_mark);
    }
    st.model.truncate(rec_mark);
    st.switches += ancestor.flipped as u32;
    st.ancestors.push(ancestor);
    st.just_stack.push(frame);
    Flow::Continue
}

/// Success without a clause body: coinduction, model subsumption, or an
/// undefined predicate's negation.
fn exit_success(
    st: &mut State,
    lit: &Literal,
    kind: JustKind,
    assumes: Vec<(bool, Term)>,
    hidden: bool,
    k: &mut dyn FnMut(&mut State) -> Flow,
) -> Flow {
    let rec_mark = st.model.len();
    st.model.push(Record {
        classical: lit.classical,
        naf: lit.naf,
        atom: lit.atom.clone(),
        assumes: assumes.clone(),
        region: std::cell::OnceCell::new(),
    });
    let parent_mark = st.just_stack.last().map(|p| p.len()).unwrap_or(0);
    if !hidden {
        if let Some(parent) = st.just_stack.last_mut() {
            parent.push(RawNode {
                classical: lit.classical,
                naf: lit.naf,
                atom: st.store.resolve(&lit.atom),
                kind,
                nmr: st.in_nmr,
                assumes,
                children: Vec::new(),
            });
        }
    }
    let flow = k(st);
    if flow == Flow::Stop {
        return Flow::Stop;
    }
    if let Some(parent) = st.just_stack.last_mut() {
        parent.truncate(parent_mark);
    }
    st.model.truncate(rec_mark);
    Flow::Continue
}

fn rename_clause(st: &mut State, clause: &Rule) -> (Vec<Term>, Vec<BodyItem>) {
    let mut map: HashMap<String, String> = HashMap::new();
    let mut fresh = |st: &mut State, v: &str| -> String {
        if let Some(n) = map.get(v) {
            return n.clone();
        }
        let n = st.fresh_var("T");
        map.insert(v.to_string(), n.clone());
        n
    };
    let head = clause.head.as_ref().expect("compiled clauses have heads");
    let head_args: Vec<Term> =
        head.atom.args().iter().map(|t| rename_term(t, &mut |v| fresh(st, v))).collect();
    let body: Vec<BodyItem> =
        clause.body.iter().map(|b| rename_body_item(b, &mut |v| fresh(st, v))).collect();
    (head_args, body)
}

/// Constraints the sub-solution imposed on the quantified variable
/// beyond the region preconditions, expressed over the placeholder name
/// so regions can re-instantiate them.  A binding of the variable is the
/// single constraint `w = value`; otherwise the store's projection onto
/// the variable is filtered against what the region alone entails.
fn news_on_var(
    st: &State,
    pre: &[ConstraintAtom],
    w: &str,
    pre_resolved: &Term,
    placeholder: &str,
) -> Vec<ConstraintAtom> {
    let w_term = Term::Var(w.to_string());
    let mut back = HashMap::new();
    back.insert(w.to_string(), Term::Var(placeholder.to_string()));

    let resolved = st.store.resolve(pre_resolved);
    if &resolved != pre_resolved {
        let atom = ConstraintAtom::herb_eq(w_term, resolved);
        return subst_constraint(&atom, &back).into_iter().collect();
    }
    if !resolved.is_var() {
        // Bound by the region itself: a solution cannot narrow it further.
        return Vec::new();
    }

    // Region preconditions over the concrete variable, in a scratch
    // store, tell which projected constraints are not news.
    let mut scratch = Store::new();
    let mut fwd = HashMap::new();
    fwd.insert(placeholder.to_string(), Term::Var(w.to_string()));
    for c in pre {
        if let Some(mapped) = subst_constraint(c, &fwd) {
            let _ = scratch.add_constraint(&mapped);
        }
    }
    st.store
        .project(&[w.to_string()])
        .into_iter()
        .filter(|c| !scratch.entails(c))
        .filter_map(|c| subst_constraint(&c, &back))
        .collect()
}

/// Universal quantification by domain carving.  `pre` are the region
/// constraints (over the placeholder variable) this instance must
/// assume.  On success all effects (constraints on outer variables,
/// model literals) stay in place; an unsatisfiable region counts as
/// covered.
fn eval_forall(
    st: &mut State,
    var: &str,
    inner: &BodyItem,
    pre: &[ConstraintAtom],
    budget: &mut u32,
) -> bool {
    if *budget == 0 {
        st.forall_blown = true;
        return false;
    }
    *budget -= 1;

    let w = st.fresh_var("F");
    let mut subst = HashMap::new();
    subst.insert(var.to_string(), Term::Var(w.clone()));

    let region_mark = st.store.mark();
    for c in pre {
        let Some(mapped) = subst_constraint(c, &subst) else {
            st.store.undo_to(region_mark);
            return true;
        };
        if !st.store.add_constraint(&mapped) {
            // Empty region: vacuously covered.
            st.store.undo_to(region_mark);
            return true;
        }
    }

    let goal =
        rename_body_item(inner, &mut |v: &str| if v == var { w.clone() } else { v.to_string() });
    let pre_resolved = st.store.resolve(&Term::Var(w.clone()));

    let mut covered = false;
    let _ = solve_item(st, &goal, &mut |st| {
        let atoms = news_on_var(st, pre, &w, &pre_resolved, var);
        if atoms.is_empty() {
            covered = true;
            return Flow::Stop; // holds for every value; effects kept
        }
        // Carve the complement: for each atom, its negation under the
        // positive prefix of the preceding ones, inside the enclosing
        // region.
        let mut all = true;
        'regions: for j in 0..atoms.len() {
            for disjunct in negate_constraint(&atoms[j]) {
                let mut region: Vec<ConstraintAtom> = pre.to_vec();
                region.extend(atoms[..j].iter().cloned());
                region.push(disjunct);
                if !eval_forall(st, var, inner, &region, budget) {
                    all = false;
                    break 'regions;
                }
            }
        }
        if all {
            covered = true;
            Flow::Stop
        } else {
            Flow::Continue // try the next solution of the goal
        }
    });
    if !covered {
        st.store.undo_to(region_mark);
    }
    covered
}

/// Resolve fully and substitute numerically pinned variables by their
/// values.
fn resolve_with_pins(store: &Store, term: &Term) -> Term {
    fn walk(store: &Store, t: &Term) -> Term {
        match t {
            Term::Var(v) => match store.pinned(v) {
                Some(q) => Term::Rat(q),
                None => t.clone(),
            },
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| walk(store, a)).collect())
            }
            other => other.clone(),
        }
    }
    let resolved = store.resolve(term);
    walk(store, &resolved)
}

fn assemble_answer(st: &State, qvars: &[(String, String)]) -> Answer {
    let justification: Vec<JustNode> = st
        .just_stack
        .first()
        .map(|frame| {
            frame.iter().filter(|n| !n.nmr).map(|n| finish_node(st, n)).collect()
        })
        .unwrap_or_default();

    // The model is the justification tree flattened in pre-order: query
    // literals first, then what proved them.
    let mut model: Vec<ModelLit> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    fn flatten(node: &JustNode, seen: &mut HashSet<String>, out: &mut Vec<ModelLit>) {
        let key = format!("{:?}", node.lit);
        if seen.insert(key) {
            out.push(node.lit.clone());
        }
        for child in &node.children {
            flatten(child, seen, out);
        }
    }
    for node in &justification {
        flatten(node, &mut seen, &mut model);
    }

    let bindings = qvars
        .iter()
        .map(|(source, internal)| {
            let resolved = resolve_with_pins(&st.store, &Term::Var(internal.clone()));
            let value = match resolved {
                Term::Var(root) => {
                    let constraints = st.store.project(std::slice::from_ref(&root));
                    Binding::Constrained { var: root, constraints }
                }
                bound => Binding::Bound(bound),
            };
            QueryBinding { name: source.clone(), value }
        })
        .collect();

    Answer { model, bindings, justification }
}

fn finish_node(st: &State, node: &RawNode) -> JustNode {
    let atom = resolve_with_pins(&st.store, &node.atom);
    let vars = atom.vars();
    let constraints = if vars.is_empty() { Vec::new() } else { st.store.project(&vars) };
    JustNode {
        lit: ModelLit { classical: node.classical, naf: node.naf, atom, constraints },
        kind: node.kind,
        children: node
            .children
            .iter()
            .filter(|c| !c.nmr)
            .map(|c| finish_node(st, c))
            .collect(),
    }
}
