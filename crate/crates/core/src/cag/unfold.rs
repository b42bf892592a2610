use std::collections::{BTreeMap, BTreeSet};

use super::canon::canonical_form;
use super::{fresh_variant, is_guess_rule};
use crate::lang::{unify, Literal, Name, Program, Rule, Substitutable};

/// Constraints derived from those of `p` by replacing positive atoms with the
/// bodies of their defining rules, at most `depth` replacements deep.
///
/// Only predicates defined exclusively by rules without default negation (and
/// not given as facts) are replaced, and only constraints in which no such
/// atom remains are returned. Each result is a consequence of `p`: whenever
/// its body holds, so does the body of the constraint it came from. Results
/// are deduplicated up to variable renaming and literal order.
pub fn unfold_constraints(p: &Program, depth: usize) -> Vec<Rule> {
    let defs = definitions(p);
    let unfoldable = |l: &Literal| matches!(l, Literal::Pos(a) if defs.contains_key(&a.signature()));

    let mut seen: BTreeSet<Vec<Literal>> = p
        .constraints()
        .map(|c| canonical_form(&c.body, &BTreeSet::new()))
        .collect();
    let mut frontier: Vec<Rule> = p.constraints().cloned().collect();
    let mut out = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for c in &frontier {
            for (i, l) in c.body.iter().enumerate() {
                let Literal::Pos(a_c) = l else { continue };
                let Some(rules) = defs.get(&a_c.signature()) else {
                    continue;
                };
                for d in rules {
                    let d = fresh_variant(d, &c.variables());
                    let Some(gamma) = unify(a_c, d.head.as_ref().unwrap()) else {
                        continue;
                    };
                    let mut body: Vec<Literal> = c.body[..i].to_vec();
                    body.extend(d.body.iter().cloned());
                    body.extend(c.body[i + 1..].iter().cloned());
                    let derived = Rule::new(None, body).substitute(&gamma);
                    if seen.insert(canonical_form(&derived.body, &BTreeSet::new())) {
                        if !derived.body.iter().any(unfoldable) {
                            out.push(derived.clone());
                        }
                        next.push(derived);
                    }
                }
            }
        }
        frontier = next;
    }
    out
}

/// Defining rules of every predicate that only has negation-free definitions.
fn definitions(p: &Program) -> BTreeMap<(Name, usize), Vec<&Rule>> {
    let mut defs: BTreeMap<(Name, usize), Vec<&Rule>> = BTreeMap::new();
    let mut excluded: BTreeSet<(Name, usize)> = p.facts.iter().map(|f| f.signature()).collect();
    for r in &p.rules {
        let Some(h) = &r.head else { continue };
        if is_guess_rule(r) || r.body.iter().any(Literal::is_aggregate) {
            excluded.insert(h.signature());
        } else {
            defs.entry(h.signature()).or_default().push(r);
        }
    }
    defs.retain(|sig, _| !excluded.contains(sig));
    defs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn person_constraint_from_hcp() {
        let p = parse_program(include_str!("../../fixtures/hcp.lp")).unwrap();
        let derived = unfold_constraints(&p, 2);
        let expected = parse_program(include_str!("../../tests/data/hcp_derived_person_constraint.lp")).unwrap();
        assert_eq!(derived, expected.rules);
    }

    #[test]
    fn depth_zero_is_empty() {
        let p = parse_program(include_str!("../../fixtures/hcp.lp")).unwrap();
        assert!(unfold_constraints(&p, 0).is_empty());
    }

    #[test]
    fn one_step_leaves_atoms_folded() {
        let p = parse_program(include_str!("../../fixtures/hcp.lp")).unwrap();
        assert!(unfold_constraints(&p, 1).is_empty());
    }

    #[test]
    fn no_definition_no_result() {
        let p = parse_program("a(X) :- b(X), not c(X). :- a(X), b(X).").unwrap();
        assert!(unfold_constraints(&p, 3).is_empty());
    }

    #[test]
    fn simple_unfolding() {
        let p = parse_program("d(1). q(X) :- d(X), not r(X). s(X) :- q(X). :- s(X), d(X).").unwrap();
        let derived = unfold_constraints(&p, 1);
        assert_eq!(derived, parse_program(":- q(X), d(X).").unwrap().rules);
    }
}
