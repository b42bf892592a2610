use std::collections::BTreeSet;
use std::fmt;

use super::{Literal, Name, Rule, Term};

/// Where an unbound variable occurs. Indices refer to `Rule::body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VariablePosition {
    Head,
    NegativeLiteral(usize),
    Builtin(usize),
    AggregateGuard(usize),
    AggregateElement { literal: usize, element: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyViolation {
    pub variable: Name,
    pub position: VariablePosition,
}

impl fmt::Display for SafetyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "variable {} is unbound in {:?}", self.variable, self.position)
    }
}

fn term_vars<'a>(terms: impl IntoIterator<Item = &'a Term>, out: &mut BTreeSet<Name>) {
    for t in terms {
        if let Term::Var(v) = t {
            out.insert(v.clone());
        }
    }
}

/// Report every variable that is not bound by a positive body atom.
///
/// Global variables must occur in a positive non-aggregate body atom.
/// Variables local to an aggregate element must occur in a positive atom of
/// that element's condition.
pub fn check_safety(rule: &Rule) -> Vec<SafetyViolation> {
    let mut bound = BTreeSet::new();
    for a in rule.positive_body() {
        a.variables(&mut bound);
    }
    let mut out = Vec::new();
    let mut report = |vars: BTreeSet<Name>, position: VariablePosition, bound: &BTreeSet<Name>| {
        for v in vars {
            if !bound.contains(&v) {
                out.push(SafetyViolation {
                    variable: v,
                    position: position.clone(),
                });
            }
        }
    };
    if let Some(h) = &rule.head {
        let mut vs = BTreeSet::new();
        h.variables(&mut vs);
        report(vs, VariablePosition::Head, &bound);
    }
    for (i, lit) in rule.body.iter().enumerate() {
        match lit {
            Literal::Pos(_) => {}
            Literal::Neg(a) => {
                let mut vs = BTreeSet::new();
                a.variables(&mut vs);
                report(vs, VariablePosition::NegativeLiteral(i), &bound);
            }
            Literal::Cmp { lhs, rhs, .. } => {
                let mut vs = BTreeSet::new();
                term_vars([lhs, rhs], &mut vs);
                report(vs, VariablePosition::Builtin(i), &bound);
            }
            Literal::Agg(agg) => {
                let mut vs = BTreeSet::new();
                term_vars(
                    agg.left
                        .iter()
                        .map(|g| &g.term)
                        .chain(agg.right.iter().map(|g| &g.term)),
                    &mut vs,
                );
                report(vs, VariablePosition::AggregateGuard(i), &bound);
                for (j, e) in agg.elements.iter().enumerate() {
                    let mut local_bound = bound.clone();
                    for l in &e.condition {
                        if let Literal::Pos(a) = l {
                            a.variables(&mut local_bound);
                        }
                    }
                    let mut vs = BTreeSet::new();
                    term_vars(&e.terms, &mut vs);
                    for l in &e.condition {
                        l.variables(&mut vs);
                    }
                    report(
                        vs,
                        VariablePosition::AggregateElement { literal: i, element: j },
                        &local_bound,
                    );
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn violations(src: &str) -> Vec<SafetyViolation> {
        check_safety(&parse_program(src).unwrap().rules[0])
    }

    #[test]
    fn safe_rule() {
        assert!(violations("a(X) :- b(X).").is_empty());
    }

    #[test]
    fn negated_only_occurrence() {
        let v = violations("a(X) :- not b(X).");
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| &*v.variable == "X"));
        assert_eq!(v[0].position, VariablePosition::Head);
        assert_eq!(v[1].position, VariablePosition::NegativeLiteral(0));
    }

    #[test]
    fn aggregate_locals() {
        assert!(violations(":- 1 > #count { C : c(C,T) }, thing(T).").is_empty());
        let v = violations(":- 1 > #count { C : not c(C,T) }, thing(T).");
        assert_eq!(
            v,
            vec![SafetyViolation {
                variable: "C".into(),
                position: VariablePosition::AggregateElement { literal: 0, element: 0 }
            }]
        );
        let v = violations(":- N > #count { C : c(C) }.");
        assert_eq!(v[0].position, VariablePosition::AggregateGuard(0));
    }

    #[test]
    fn builtin_needs_binding() {
        let v = violations(":- a(X), X < Y.");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].position, VariablePosition::Builtin(1));
    }
}
