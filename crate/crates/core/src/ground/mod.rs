//! Grounding: turning a program with variables into a variable-free one.
//!
//! Two instantiators live here. [`herbrand_instantiate`] enumerates every
//! assignment of universe constants and is only meant as a reference.
//! [`ground`] works bottom-up over derivable atoms and simplifies the result
//! using atoms that are known to be true (determined facts) or known to be
//! underivable.

mod herbrand;
mod seminaive;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::lang::{Atom, CmpOp, Literal, Program, Rule, Term};

pub use herbrand::{herbrand_instantiate, herbrand_instantiate_with};
pub use seminaive::{ground, ground_with};

/// Default cap on the number of rule instances a grounder may produce.
pub const DEFAULT_INSTANCE_CAP: u64 = 10_000_000;

/// A variable-free program: rules plus atoms already proven true.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub rules: Vec<Rule>,
    pub facts: BTreeSet<Atom>,
}

impl GroundProgram {
    /// View as an ordinary program, determined facts first.
    pub fn to_program(&self) -> Program {
        Program::new(self.rules.clone(), self.facts.iter().cloned().collect())
    }

    pub fn render(&self) -> String {
        self.to_program().to_string()
    }

    /// Every atom mentioned anywhere in the program.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out: BTreeSet<Atom> = self.facts.clone();
        for r in &self.rules {
            out.extend(r.head.iter().cloned());
            for l in &r.body {
                collect_literal_atoms(l, &mut out);
            }
        }
        out
    }

    pub fn constraint_count(&self) -> usize {
        self.rules.iter().filter(|r| r.is_constraint()).count()
    }
}

fn collect_literal_atoms(l: &Literal, out: &mut BTreeSet<Atom>) {
    match l {
        Literal::Pos(a) | Literal::Neg(a) => {
            out.insert(a.clone());
        }
        Literal::Agg(agg) => {
            for e in &agg.elements {
                for c in &e.condition {
                    collect_literal_atoms(c, out);
                }
            }
        }
        Literal::Cmp { .. } => {}
    }
}

fn literal_atom_occurrences(l: &Literal) -> usize {
    match l {
        Literal::Pos(_) | Literal::Neg(_) => 1,
        Literal::Agg(agg) => agg
            .elements
            .iter()
            .flat_map(|e| &e.condition)
            .map(literal_atom_occurrences)
            .sum(),
        Literal::Cmp { .. } => 0,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroundingStats {
    /// Rules including constraints; determined facts are not counted.
    pub rule_count: usize,
    pub constraint_count: usize,
    /// Atom occurrences over rules (heads, bodies, aggregate conditions) and facts.
    pub atom_occurrences: usize,
    /// Length of the canonical rendering.
    pub bytes: usize,
    pub elapsed: Duration,
}

pub fn grounding_stats(g: &GroundProgram, elapsed: Duration) -> GroundingStats {
    let atom_occurrences = g.facts.len()
        + g.rules
            .iter()
            .map(|r| usize::from(r.head.is_some()) + r.body.iter().map(literal_atom_occurrences).sum::<usize>())
            .sum::<usize>();
    GroundingStats {
        rule_count: g.rules.len(),
        constraint_count: g.constraint_count(),
        atom_occurrences,
        bytes: g.render().len(),
        elapsed,
    }
}

#[derive(Clone, Debug)]
pub struct GroundOptions {
    /// Keep ground constraints that only differ by the order of their body
    /// literals (gringo-like counts). Off by default: bodies are sorted.
    pub keep_symmetric: bool,
    pub instance_cap: u64,
    pub deadline: Option<Instant>,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            keep_symmetric: false,
            instance_cap: DEFAULT_INSTANCE_CAP,
            deadline: None,
        }
    }
}

/// Evaluate a ground builtin comparison.
pub(crate) fn eval_cmp(lhs: &Term, op: CmpOp, rhs: &Term) -> bool {
    op.eval(lhs, rhs)
}

/// Ground program with a measured grounding time, as used by the drivers.
pub fn ground_timed(p: &Program, opts: &GroundOptions) -> crate::Result<(GroundProgram, GroundingStats)> {
    let start = Instant::now();
    let g = ground_with(p, opts)?;
    let elapsed = start.elapsed();
    let stats = grounding_stats(&g, elapsed);
    Ok((g, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stats() {
        let s = grounding_stats(&GroundProgram::default(), Duration::ZERO);
        assert_eq!(s.rule_count, 0);
        assert_eq!(s.constraint_count, 0);
        assert_eq!(s.atom_occurrences, 0);
        assert_eq!(s.bytes, 0);
    }
}
