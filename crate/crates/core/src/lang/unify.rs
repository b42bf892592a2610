use std::collections::BTreeMap;
use std::fmt;

use super::{Aggregate, AggregateElement, Atom, LeftGuard, Literal, Name, RightGuard, Rule, Term};

/// A finite, idempotent map from variable names to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Name, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.bindings.iter()
    }

    /// Bind `var` to `term`, keeping the map idempotent: the new binding is
    /// pushed through existing values and existing values are rewritten.
    pub fn bind(&mut self, var: Name, term: Term) {
        let term = self.resolve(&term);
        if term == Term::Var(var.clone()) {
            return;
        }
        for v in self.bindings.values_mut() {
            if let Term::Var(name) = v {
                if *name == var {
                    *v = term.clone();
                }
            }
        }
        self.bindings.insert(var, term);
    }

    pub fn resolve(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        }
    }
}

impl FromIterator<(Name, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Name, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.bind(v, t);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}->{t}")?;
        }
        f.write_str("}")
    }
}

/// Most general unifier of two atoms.
///
/// When two variables meet, the variable of `b` is bound to the variable of
/// `a`, so `a`'s variables survive in the result.
pub fn unify(a: &Atom, b: &Atom) -> Option<Substitution> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    let mut s = Substitution::new();
    for (x, y) in a.args.iter().zip(&b.args) {
        let (x, y) = (s.resolve(x), s.resolve(y));
        if x == y {
            continue;
        }
        match (&x, &y) {
            (_, Term::Var(v)) => s.bind(v.clone(), x.clone()),
            (Term::Var(v), _) => s.bind(v.clone(), y.clone()),
            _ => return None,
        }
    }
    Some(s)
}

pub trait Substitutable: Sized {
    fn substitute(&self, s: &Substitution) -> Self;
}

impl Substitutable for Term {
    fn substitute(&self, s: &Substitution) -> Self {
        s.resolve(self)
    }
}

impl Substitutable for Atom {
    fn substitute(&self, s: &Substitution) -> Self {
        Atom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| s.resolve(t)).collect(),
        }
    }
}

impl Substitutable for AggregateElement {
    fn substitute(&self, s: &Substitution) -> Self {
        AggregateElement {
            terms: self.terms.iter().map(|t| s.resolve(t)).collect(),
            condition: self.condition.iter().map(|l| l.substitute(s)).collect(),
        }
    }
}

impl Substitutable for Aggregate {
    fn substitute(&self, s: &Substitution) -> Self {
        Aggregate {
            left: self.left.as_ref().map(|g| LeftGuard {
                term: s.resolve(&g.term),
                op: g.op,
            }),
            elements: self.elements.iter().map(|e| e.substitute(s)).collect(),
            right: self.right.as_ref().map(|g| RightGuard {
                op: g.op,
                term: s.resolve(&g.term),
            }),
        }
    }
}

impl Substitutable for Literal {
    fn substitute(&self, s: &Substitution) -> Self {
        match self {
            Literal::Pos(a) => Literal::Pos(a.substitute(s)),
            Literal::Neg(a) => Literal::Neg(a.substitute(s)),
            Literal::Cmp { lhs, op, rhs } => Literal::Cmp {
                lhs: s.resolve(lhs),
                op: *op,
                rhs: s.resolve(rhs),
            },
            Literal::Agg(agg) => Literal::Agg(agg.substitute(s)),
        }
    }
}

impl Substitutable for Rule {
    fn substitute(&self, s: &Substitution) -> Self {
        Rule {
            head: self.head.as_ref().map(|h| h.substitute(s)),
            body: self.body.iter().map(|l| l.substitute(s)).collect(),
        }
    }
}

pub fn apply_substitution<T: Substitutable>(x: &T, s: &Substitution) -> T {
    x.substitute(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_atom, parse_program};
    use proptest::prelude::*;

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    #[test]
    fn unify_rule_and_constraint_atoms() {
        let s = unify(&atom("mINf(X,Y)"), &atom("mINf(M1,F)")).unwrap();
        assert_eq!(s.get("M1"), Some(&Term::var("X")));
        assert_eq!(s.get("F"), Some(&Term::var("Y")));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn unify_ground_and_mismatch() {
        assert!(unify(&atom("p(1)"), &atom("p(1)")).unwrap().is_empty());
        assert!(unify(&atom("p(1)"), &atom("q(1)")).is_none());
        assert!(unify(&atom("p(1)"), &atom("p(2)")).is_none());
        assert!(unify(&atom("p(X,X)"), &atom("p(1,2)")).is_none());
    }

    #[test]
    fn apply_simple_and_empty() {
        let s: Substitution = [(Name::from("X"), Term::Int(1))].into_iter().collect();
        assert_eq!(atom("p(X,Y)").substitute(&s), atom("p(1,Y)"));
        let a = atom("p(X,Y)");
        assert_eq!(a.substitute(&Substitution::new()), a);
    }

    #[test]
    fn filter_body_substitution() {
        let c = &parse_program(":- module(M1), module(M2), frame(F), mINf(M1,F), mINf(M2,F), M1 <> M2.")
            .unwrap()
            .rules[0];
        let gamma = unify(&atom("mINf(X,Y)"), &atom("mINf(M1,F)")).unwrap();
        let rest: Vec<Literal> = c
            .body
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 3)
            .map(|(_, l)| l.substitute(&gamma))
            .collect();
        let expected = &parse_program(":- module(X), module(M2), frame(Y), mINf(M2,Y), X <> M2.")
            .unwrap()
            .rules[0]
            .body;
        assert_eq!(&rest, expected);
    }

    fn small_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            (0i64..3).prop_map(Term::Int),
            prop::sample::select(vec!["a", "b"]).prop_map(Term::sym),
            prop::sample::select(vec!["X", "Y", "Z", "W"]).prop_map(Term::var),
        ]
    }

    fn renamed(t: Term) -> Term {
        match t {
            Term::Var(v) => Term::Var(format!("{v}2").into()),
            t => t,
        }
    }

    proptest! {
        #[test]
        fn mgu_is_most_general(
            xs in prop::collection::vec(small_term(), 0..=4),
            ys in prop::collection::vec(small_term(), 0..=4),
            assignment in prop::collection::vec(small_term().prop_filter("ground", Term::is_ground), 8),
        ) {
            let n = xs.len().min(ys.len());
            let a = Atom::new("p", xs[..n].to_vec());
            let b = Atom::new("p", ys[..n].iter().cloned().map(renamed).collect());
            let vars = ["X", "Y", "Z", "W", "X2", "Y2", "Z2", "W2"];
            // a ground assignment of every variable
            let delta: Substitution = vars
                .iter()
                .zip(&assignment)
                .map(|(v, t)| (Name::from(*v), t.clone()))
                .collect();
            let delta_unifies = a.substitute(&delta) == b.substitute(&delta);
            match unify(&a, &b) {
                Some(gamma) => {
                    prop_assert_eq!(a.substitute(&gamma), b.substitute(&gamma));
                    // idempotent
                    let once = a.substitute(&gamma);
                    prop_assert_eq!(once.substitute(&gamma), once.clone());
                    if delta_unifies {
                        // delta factors through gamma: delta = gamma ; delta
                        for v in vars {
                            let t = Term::var(v);
                            prop_assert_eq!(t.substitute(&gamma).substitute(&delta), t.substitute(&delta));
                        }
                    }
                }
                None => prop_assert!(!delta_unifies),
            }
        }

        #[test]
        fn substitution_is_homomorphic(src in prop::sample::select(vec![
            "a(X) :- b(X,Y), not c(Y), X < Y.",
            ":- 1 > #count { C : d(C,T) }, t(T).",
            "p(X,Y) :- q(X), r(Y), #count { 1 : s(X,Z), Z <> Y } < 1.",
        ]), v in prop::sample::select(vec!["X", "Y", "T"]), value in 0i64..5) {
            let rule = parse_program(src).unwrap().rules.remove(0);
            let s: Substitution = [(Name::from(v), Term::Int(value))].into_iter().collect();
            let whole = rule.substitute(&s);
            prop_assert_eq!(whole.head, rule.head.as_ref().map(|h| h.substitute(&s)));
            let parts: Vec<Literal> = rule.body.iter().map(|l| l.substitute(&s)).collect();
            prop_assert_eq!(whole.body, parts);
        }
    }
}
