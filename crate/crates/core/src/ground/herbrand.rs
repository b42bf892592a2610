use std::collections::BTreeSet;

use super::{eval_cmp, GroundProgram, DEFAULT_INSTANCE_CAP};
use crate::error::{Error, Result};
use crate::lang::{Aggregate, AggregateElement, Literal, Name, Program, Rule, Substitutable, Substitution, Term};

/// Instantiate every rule with every assignment of universe constants.
///
/// The universe is the set of constants occurring as atom arguments. Builtins
/// are evaluated and rules with a false builtin are dropped; nothing else is
/// simplified.
pub fn herbrand_instantiate(p: &Program) -> Result<GroundProgram> {
    herbrand_instantiate_with(p, DEFAULT_INSTANCE_CAP)
}

pub fn herbrand_instantiate_with(p: &Program, cap: u64) -> Result<GroundProgram> {
    let universe = universe(p);
    let mut rules = Vec::new();
    let mut produced: u64 = 0;
    for rule in &p.rules {
        let globals = global_vars(rule);
        let count = (universe.len() as u64)
            .checked_pow(globals.len() as u32)
            .unwrap_or(u64::MAX);
        produced = produced.saturating_add(count);
        if produced > cap {
            return Err(Error::UniverseTooLarge { limit: cap });
        }
        for s in assignments(&globals, &universe) {
            if let Some(r) = instantiate(rule, &s, &universe, cap)? {
                rules.push(r);
            }
        }
    }
    Ok(GroundProgram {
        rules,
        facts: p.facts.iter().cloned().collect(),
    })
}

fn universe(p: &Program) -> Vec<Term> {
    fn walk(l: &Literal, out: &mut BTreeSet<Term>) {
        match l {
            Literal::Pos(a) | Literal::Neg(a) => out.extend(a.args.iter().filter(|t| t.is_ground()).cloned()),
            Literal::Agg(agg) => {
                for e in &agg.elements {
                    for c in &e.condition {
                        walk(c, out);
                    }
                }
            }
            Literal::Cmp { .. } => {}
        }
    }
    let mut out = BTreeSet::new();
    for f in &p.facts {
        out.extend(f.args.iter().cloned());
    }
    for r in &p.rules {
        if let Some(h) = &r.head {
            out.extend(h.args.iter().filter(|t| t.is_ground()).cloned());
        }
        for l in &r.body {
            walk(l, &mut out);
        }
    }
    out.into_iter().collect()
}

/// Variables occurring outside aggregate elements.
fn global_vars(rule: &Rule) -> Vec<Name> {
    let mut out = BTreeSet::new();
    if let Some(h) = &rule.head {
        h.variables(&mut out);
    }
    for l in &rule.body {
        match l {
            Literal::Agg(agg) => {
                for t in agg
                    .left
                    .iter()
                    .map(|g| &g.term)
                    .chain(agg.right.iter().map(|g| &g.term))
                {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            other => other.variables(&mut out),
        }
    }
    out.into_iter().collect()
}

fn assignments<'a>(vars: &'a [Name], universe: &'a [Term]) -> impl Iterator<Item = Substitution> + 'a {
    let n = universe.len();
    let total = if vars.is_empty() {
        1
    } else if n == 0 {
        0
    } else {
        n.pow(vars.len() as u32)
    };
    (0..total).map(move |mut code| {
        let mut s = Substitution::new();
        for v in vars.iter().rev() {
            s.bind(v.clone(), universe[code % n].clone());
            code /= n;
        }
        s
    })
}

/// Returns `Ok(None)` when a builtin in the rule body is false.
fn instantiate(rule: &Rule, s: &Substitution, universe: &[Term], cap: u64) -> Result<Option<Rule>> {
    let mut body = Vec::with_capacity(rule.body.len());
    for l in &rule.body {
        match l.substitute(s) {
            Literal::Cmp { lhs, op, rhs } => {
                if !eval_cmp(&lhs, op, &rhs) {
                    return Ok(None);
                }
            }
            Literal::Agg(agg) => body.push(Literal::Agg(instantiate_aggregate(&agg, universe, cap)?)),
            other => body.push(other),
        }
    }
    Ok(Some(Rule {
        head: rule.head.as_ref().map(|h| h.substitute(s)),
        body,
    }))
}

fn instantiate_aggregate(agg: &Aggregate, universe: &[Term], cap: u64) -> Result<Aggregate> {
    let mut elements = Vec::new();
    for e in &agg.elements {
        let mut locals = BTreeSet::new();
        for t in &e.terms {
            if let Term::Var(v) = t {
                locals.insert(v.clone());
            }
        }
        for c in &e.condition {
            c.variables(&mut locals);
        }
        let locals: Vec<Name> = locals.into_iter().collect();
        let count = (universe.len() as u64)
            .checked_pow(locals.len() as u32)
            .unwrap_or(u64::MAX);
        if count > cap {
            return Err(Error::UniverseTooLarge { limit: cap });
        }
        'outer: for s in assignments(&locals, universe) {
            let mut condition = Vec::new();
            for c in &e.condition {
                match c.substitute(&s) {
                    Literal::Cmp { lhs, op, rhs } => {
                        if !eval_cmp(&lhs, op, &rhs) {
                            continue 'outer;
                        }
                    }
                    other => condition.push(other),
                }
            }
            elements.push(AggregateElement {
                terms: e.terms.iter().map(|t| t.substitute(&s)).collect(),
                condition,
            });
        }
    }
    Ok(Aggregate {
        left: agg.left.clone(),
        elements,
        right: agg.right.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn facts_only() {
        let p = parse_program("a(1). b(2).").unwrap();
        let g = herbrand_instantiate(&p).unwrap();
        assert!(g.rules.is_empty());
        assert_eq!(g.facts.len(), 2);
    }

    #[test]
    fn builtin_filtering() {
        let p = parse_program("b(1). b(2). b(3). a(X) :- b(X), X < 2.").unwrap();
        let g = herbrand_instantiate(&p).unwrap();
        assert_eq!(g.rules, parse_program("a(1) :- b(1).").unwrap().rules);
    }

    #[test]
    fn module_frame_guesses_all_pairs() {
        let p = parse_program(include_str!("../../fixtures/module_frame.lp")).unwrap();
        let g = herbrand_instantiate(&p).unwrap();
        let guesses: BTreeSet<String> = g
            .rules
            .iter()
            .filter(|r| r.has_negation() && r.head.as_ref().is_some_and(|h| &*h.predicate == "mINf"))
            .map(|r| r.head.as_ref().unwrap().to_string())
            .collect();
        assert_eq!(
            guesses.into_iter().collect::<Vec<_>>(),
            ["mINf(1,1)", "mINf(1,2)", "mINf(2,1)", "mINf(2,2)"]
        );
    }

    #[test]
    fn cap_enforced() {
        let p = parse_program("d(1). d(2). d(3). :- d(X), d(Y), d(Z).").unwrap();
        assert_eq!(
            herbrand_instantiate_with(&p, 10),
            Err(Error::UniverseTooLarge { limit: 10 })
        );
    }
}
