//! Complements of constraint atoms as finite disjunctions.
//!
//! Every supported operator has a complement expressible with one or two
//! atoms: order comparisons flip, numeric equality splits into `<` and
//! `>` (in that order), and Herbrand equality becomes a disequality
//! obligation for the runtime solver.

use crate::syntax::{ConstraintAtom, NumOp};

/// The constraints whose union of solution sets complements `c`'s.
pub fn negate_constraint(c: &ConstraintAtom) -> Vec<ConstraintAtom> {
    match c {
        ConstraintAtom::Num { op, lhs, rhs } => {
            let a = |op: NumOp| ConstraintAtom::num(op, lhs.clone(), rhs.clone());
            match op {
                NumOp::Lt => vec![a(NumOp::Ge)],
                NumOp::Gt => vec![a(NumOp::Le)],
                NumOp::Le => vec![a(NumOp::Gt)],
                NumOp::Ge => vec![a(NumOp::Lt)],
                NumOp::Eq => vec![a(NumOp::Lt), a(NumOp::Gt)],
                NumOp::Ne => vec![a(NumOp::Eq)],
            }
        }
        ConstraintAtom::Herb { eq, lhs, rhs } => {
            vec![ConstraintAtom::Herb { eq: !eq, lhs: lhs.clone(), rhs: rhs.clone() }]
        }
    }
}
