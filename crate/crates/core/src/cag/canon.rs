//! Canonical forms of literal lists up to renaming of local variables.

use std::collections::BTreeSet;

use crate::lang::{Aggregate, AggregateElement, CmpOp, Literal, Name, Substitutable, Substitution, Term};

/// Canonical form of `lits`, where variables in `fixed` keep their names and
/// every other variable is renamed to one of `V0, V1, ...`.
///
/// Two literal lists that differ only by the order of their literals, the
/// orientation of comparisons, and the names of non-fixed variables have the
/// same canonical form. The form is the smallest rendering over all numberings
/// of the local variables; beyond [`EXACT_LOCALS`] locals a numbering by first
/// occurrence is used instead, which may miss some equivalences.
pub fn canonical_form(lits: &[Literal], fixed: &BTreeSet<Name>) -> Vec<Literal> {
    let mut locals = BTreeSet::new();
    for l in lits {
        l.variables(&mut locals);
    }
    let locals: Vec<Name> = locals.difference(fixed).cloned().collect();
    if locals.len() > EXACT_LOCALS {
        return by_first_occurrence(lits, &locals);
    }
    let mut best: Option<(String, Vec<Literal>)> = None;
    let mut perm: Vec<usize> = (0..locals.len()).collect();
    loop {
        let renaming: Substitution = locals
            .iter()
            .zip(&perm)
            .map(|(v, &i)| (v.clone(), Term::var(&format!("V{i}"))))
            .collect();
        let form = renamed_sorted(lits, &renaming);
        let key: String = form.iter().map(|l| format!("{l}\n")).collect();
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, form));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.map(|(_, f)| f).unwrap_or_default()
}

/// Largest number of local variables for which every numbering is tried.
pub const EXACT_LOCALS: usize = 7;

fn renamed_sorted(lits: &[Literal], renaming: &Substitution) -> Vec<Literal> {
    let plain = |l: &Literal| l.to_string();
    let mut out: Vec<Literal> = lits
        .iter()
        .map(|l| normalize(&l.substitute(renaming), &plain))
        .collect();
    out.sort_by_cached_key(|l| l.to_string());
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn by_first_occurrence(lits: &[Literal], locals: &[Name]) -> Vec<Literal> {
    let mask: Substitution = locals.iter().map(|v| (v.clone(), Term::var("_"))).collect();
    let masked_key = |l: &Literal| l.substitute(&mask).to_string();
    let mut sorted: Vec<Literal> = lits.iter().map(|l| normalize(l, &masked_key)).collect();
    sorted.sort_by_cached_key(|l| (masked_key(l), l.to_string()));
    let mut order: Vec<Name> = Vec::new();
    for l in &sorted {
        literal_vars_in_order(l, &mut order);
    }
    let renaming: Substitution = order
        .iter()
        .filter(|v| locals.contains(v))
        .enumerate()
        .map(|(i, v)| (v.clone(), Term::var(&format!("V{i}"))))
        .collect();
    renamed_sorted(&sorted, &renaming)
}

fn normalize(l: &Literal, key: &dyn Fn(&Literal) -> String) -> Literal {
    match l {
        Literal::Cmp { lhs, op, rhs } => {
            let (lhs, op, rhs) = match op {
                CmpOp::Gt | CmpOp::Ge => (rhs.clone(), op.flip(), lhs.clone()),
                _ => (lhs.clone(), *op, rhs.clone()),
            };
            if matches!(op, CmpOp::Eq | CmpOp::Ne) {
                let swapped = Literal::Cmp {
                    lhs: rhs.clone(),
                    op,
                    rhs: lhs.clone(),
                };
                let straight = Literal::Cmp { lhs, op, rhs };
                if (key(&swapped), swapped.to_string()) < (key(&straight), straight.to_string()) {
                    return swapped;
                }
                return straight;
            }
            Literal::Cmp { lhs, op, rhs }
        }
        Literal::Agg(agg) => {
            let agg = agg.normalized();
            let mut elements: Vec<AggregateElement> = agg
                .elements
                .iter()
                .map(|e| {
                    let mut condition: Vec<Literal> = e.condition.iter().map(|c| normalize(c, key)).collect();
                    condition.sort_by_cached_key(|c| (key(c), c.to_string()));
                    AggregateElement {
                        terms: e.terms.clone(),
                        condition,
                    }
                })
                .collect();
            elements.sort_by_cached_key(|e| e.to_string());
            Literal::Agg(Aggregate { elements, ..agg })
        }
        other => other.clone(),
    }
}

fn term_var(t: &Term, out: &mut Vec<Name>) {
    if let Term::Var(v) = t {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
}

fn literal_vars_in_order(l: &Literal, out: &mut Vec<Name>) {
    match l {
        Literal::Pos(a) | Literal::Neg(a) => a.args.iter().for_each(|t| term_var(t, out)),
        Literal::Cmp { lhs, rhs, .. } => {
            term_var(lhs, out);
            term_var(rhs, out);
        }
        Literal::Agg(agg) => {
            if let Some(g) = &agg.left {
                term_var(&g.term, out);
            }
            for e in &agg.elements {
                e.terms.iter().for_each(|t| term_var(t, out));
                e.condition.iter().for_each(|c| literal_vars_in_order(c, out));
            }
            if let Some(g) = &agg.right {
                term_var(&g.term, out);
            }
        }
    }
}
