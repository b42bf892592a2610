//! Stable models of ground programs.
//!
//! [`solve`] runs a backtracking search with propagation and validates every
//! candidate before emitting it. [`enumerate_brute_force`] tests every subset
//! of candidate atoms and serves as an independent oracle.
//!
//! Aggregates are evaluated against the candidate interpretation before the
//! reduct is taken, the same way default negation is. This matches the usual
//! semantics for antimonotone aggregates and for aggregates in constraints.

mod search;

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::ground::GroundProgram;
use crate::lang::{Aggregate, Atom, Literal, Rule, Term};

pub use search::{solve, solve_all, solve_with, SolveOptions};

/// Largest number of candidate atoms [`enumerate_brute_force`] accepts.
pub const BRUTE_FORCE_CAP: usize = 24;

/// A stable model: the set of its true atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnswerSet {
    pub atoms: BTreeSet<Atom>,
}

impl AnswerSet {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> AnswerSet {
        AnswerSet {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.contains(a)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn to_interpretation(&self) -> Interpretation {
        Interpretation {
            atoms: self.atoms.clone(),
        }
    }
}

/// Renders as one line of space-separated atoms.
impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for a in &self.atoms {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A two-valued interpretation given by its true atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interpretation {
    pub atoms: BTreeSet<Atom>,
}

impl Interpretation {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Interpretation {
        Interpretation {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.contains(a)
    }

    /// Truth of a ground literal.
    pub fn holds(&self, l: &Literal) -> bool {
        match l {
            Literal::Pos(a) => self.contains(a),
            Literal::Neg(a) => !self.contains(a),
            Literal::Cmp { lhs, op, rhs } => op.eval(lhs, rhs),
            Literal::Agg(agg) => eval_aggregate(agg, self),
        }
    }
}

impl From<AnswerSet> for Interpretation {
    fn from(a: AnswerSet) -> Interpretation {
        Interpretation { atoms: a.atoms }
    }
}

/// Truth of a ground `#count` aggregate: the number of distinct element tuples
/// whose conditions hold, checked against both guards.
pub fn eval_aggregate(agg: &Aggregate, i: &Interpretation) -> bool {
    let tuples: BTreeSet<&[Term]> = agg
        .elements
        .iter()
        .filter(|e| e.condition.iter().all(|l| i.holds(l)))
        .map(|e| e.terms.as_slice())
        .collect();
    agg.guards_hold(tuples.len())
}

/// Constraints of `g` whose body holds in `i`.
pub fn violated_constraints<'g>(g: &'g GroundProgram, i: &Interpretation) -> Vec<&'g Rule> {
    g.rules
        .iter()
        .filter(|r| r.head.is_none() && r.body.iter().all(|l| i.holds(l)))
        .collect()
}

/// Whether `i` is a stable model of `g`.
///
/// `i` must satisfy every constraint and equal the least model of the reduct,
/// where negated atoms and aggregates are evaluated under `i` up front.
pub fn check_stable(g: &GroundProgram, i: &Interpretation) -> bool {
    let mut model: BTreeSet<Atom> = g.facts.clone();
    // rules of the reduct as (head, positive body)
    let mut reduct: Vec<(&Atom, Vec<&Atom>)> = Vec::new();
    for r in &g.rules {
        let context_holds = r.body.iter().all(|l| match l {
            Literal::Pos(_) => true,
            other => i.holds(other),
        });
        match &r.head {
            None => {
                if context_holds && r.positive_body().all(|a| i.contains(a)) {
                    return false;
                }
            }
            Some(h) => {
                if context_holds {
                    reduct.push((h, r.positive_body().collect()));
                }
            }
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for (h, body) in &reduct {
            if !model.contains(*h) && body.iter().all(|a| model.contains(*a)) {
                model.insert((*h).clone());
                changed = true;
            }
        }
    }
    model == i.atoms
}

/// Every stable model of `g`, found by testing all subsets of its candidate
/// atoms (rule heads that are not facts).
pub fn enumerate_brute_force(g: &GroundProgram) -> Result<Vec<AnswerSet>> {
    let candidates: Vec<&Atom> = g
        .rules
        .iter()
        .filter_map(|r| r.head.as_ref())
        .filter(|h| !g.facts.contains(*h))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if candidates.len() > BRUTE_FORCE_CAP {
        return Err(Error::TooManyAtoms {
            count: candidates.len(),
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << candidates.len()) {
        let mut i = Interpretation { atoms: g.facts.clone() };
        for (bit, a) in candidates.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                i.atoms.insert((*a).clone());
            }
        }
        if check_stable(g, &i) {
            out.push(AnswerSet { atoms: i.atoms });
        }
    }
    out.sort();
    Ok(out)
}

pub(crate) fn timed_out(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::ground;
    use crate::lang::{parse_atom, parse_atoms, parse_program};

    fn gp(src: &str) -> GroundProgram {
        let p = parse_program(src).unwrap();
        GroundProgram {
            rules: p.rules,
            facts: p.facts.into_iter().collect(),
        }
    }

    fn interp(s: &str) -> Interpretation {
        Interpretation::new(parse_atoms(s).unwrap())
    }

    fn agg(src: &str) -> Aggregate {
        let p = parse_program(&format!(":- {src}.")).unwrap();
        match &p.rules[0].body[0] {
            Literal::Agg(a) => a.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn empty_aggregate_counts_zero() {
        assert!(eval_aggregate(&agg("#count { } < 1"), &interp("a")));
    }

    #[test]
    fn lower_bound_not_reached() {
        let a = agg(
            "6 <= #count { 1 : cabinetTOthing(c,1); 2 : cabinetTOthing(c,2); 3 : cabinetTOthing(c,3); \
             4 : cabinetTOthing(c,4); 5 : cabinetTOthing(c,5); 6 : cabinetTOthing(c,6) }",
        );
        let i = interp(
            "cabinetTOthing(c,1) cabinetTOthing(c,2) cabinetTOthing(c,3) cabinetTOthing(c,4) cabinetTOthing(c,5)",
        );
        assert!(!eval_aggregate(&a, &i));
    }

    #[test]
    fn filter_aggregate() {
        let a = agg("#count { 1 : module(1), mINf(2,1) } < 1");
        assert!(!eval_aggregate(&a, &interp("module(1) mINf(2,1)")));
        assert!(eval_aggregate(&a, &interp("module(1)")));
    }

    #[test]
    fn duplicate_tuples_count_once() {
        let a = agg("#count { 1 : a; 1 : b } = 1");
        assert!(eval_aggregate(&a, &interp("a b")));
    }

    #[test]
    fn even_loop() {
        let g = gp("a :- not b. b :- not a.");
        assert!(check_stable(&g, &interp("a")));
        assert!(check_stable(&g, &interp("b")));
        assert!(!check_stable(&g, &interp("a b")));
        assert!(!check_stable(&g, &interp("")));
    }

    #[test]
    fn unfounded_atom() {
        let g = gp("a :- a.");
        assert!(check_stable(&g, &interp("")));
        assert!(!check_stable(&g, &interp("a")));
    }

    #[test]
    fn brute_force_examples() {
        let g = gp("a :- not b. b :- not a.");
        let models = enumerate_brute_force(&g).unwrap();
        assert_eq!(
            models,
            vec![
                AnswerSet::new([parse_atom("a").unwrap()]),
                AnswerSet::new([parse_atom("b").unwrap()])
            ]
        );
        assert!(enumerate_brute_force(&gp(":- not a.")).unwrap().is_empty());
    }

    #[test]
    fn brute_force_cap() {
        let src: String = (0..25).map(|i| format!("a{i} :- not b{i}. ")).collect();
        assert!(matches!(
            enumerate_brute_force(&gp(&src)),
            Err(Error::TooManyAtoms { count: 25, cap: 24 })
        ));
    }

    #[test]
    fn hcp_example_configuration_is_stable() {
        let enc = parse_program(include_str!("../../fixtures/hcp.lp")).unwrap();
        let inst = parse_program(include_str!("../../fixtures/hcp_example_instance.lp")).unwrap();
        let p = enc.with_facts(inst.facts.iter().cloned());
        let g = ground(&p).unwrap();
        let mut i = interp(
            "cabinet(1) cabinet(2) room(1) room(2) \
             cabinetTOthing(1,1) cabinetTOthing(1,2) cabinetTOthing(2,3) cabinetTOthing(2,4) \
             roomTOcabinet(1,1) roomTOcabinet(2,2) \
             personTOcabinet(1,1) personTOcabinet(2,2) personTOroom(1,1) personTOroom(2,2) \
             cabinetTOthing_n(1,3) cabinetTOthing_n(1,4) cabinetTOthing_n(2,1) cabinetTOthing_n(2,2) \
             roomTOcabinet_n(1,2) roomTOcabinet_n(2,1)",
        );
        i.atoms.extend(inst.facts.iter().cloned());
        assert!(check_stable(&g, &i));
        i.atoms.insert(parse_atom("room_n(1)").unwrap());
        assert!(!check_stable(&g, &i));
    }
}
