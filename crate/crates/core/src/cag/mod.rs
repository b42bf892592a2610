//! Constraint-aware guessing.
//!
//! A guess rule `r` whose head unifies with a positive atom `a_c` of a
//! constraint `c` can only produce an atom that makes `c` fire if the rest of
//! `c` holds. That rest, `(body(c) - a_c)` under the unifier, is a filter
//! condition; adding its negation to the body of `r` stops the grounder from
//! instantiating guesses that every answer set would reject anyway.

mod canon;
mod unfold;

use std::collections::BTreeSet;
use std::fmt;

use log::warn;

use crate::lang::{
    unify, Aggregate, AggregateElement, CmpOp, Literal, Name, Program, RightGuard, Rule, Substitutable, Substitution,
    Term,
};

pub use canon::canonical_form;
pub use unfold::unfold_constraints;

/// Unfolding depth used when none is given.
pub const DEFAULT_UNFOLD_DEPTH: usize = 2;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GuessCheckPartition {
    pub guess: Vec<Rule>,
    pub check: Vec<Rule>,
}

/// A rule with a head and at least one default-negated body atom.
pub fn is_guess_rule(r: &Rule) -> bool {
    r.head.is_some() && r.has_negation()
}

pub fn guess_check_partition(p: &Program) -> GuessCheckPartition {
    let (guess, check) = p.rules.iter().cloned().partition(is_guess_rule);
    GuessCheckPartition { guess, check }
}

/// One filter condition for a rule, with where it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilterCondition {
    pub literals: Vec<Literal>,
    /// The constraint after renaming its variables apart from the rule.
    pub source: Rule,
    /// Index into `source.body` of the atom that unified with the rule head.
    pub matched: usize,
    pub unifier: Substitution,
}

impl fmt::Display for FilterCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}} from `{}` at {}", lits.join(", "), self.source, self.matched)
    }
}

/// Filter conditions of `r` from the constraints of `p` and from the
/// constraints derived at the default unfolding depth.
pub fn filter_conditions(r: &Rule, p: &Program) -> Vec<FilterCondition> {
    filter_conditions_from(r, &constraint_sources(p, DEFAULT_UNFOLD_DEPTH))
}

/// Constraints of `p` followed by the ones derived by unfolding.
pub fn constraint_sources(p: &Program, depth: usize) -> Vec<Rule> {
    let mut out: Vec<Rule> = p.constraints().cloned().collect();
    out.extend(unfold_constraints(p, depth));
    out
}

/// Filter conditions of `r` from the given constraints, deduplicated up to
/// renaming of variables that do not occur in `r`.
pub fn filter_conditions_from(r: &Rule, constraints: &[Rule]) -> Vec<FilterCondition> {
    let Some(head) = &r.head else {
        return Vec::new();
    };
    let rule_vars = r.variables();
    let mut seen: BTreeSet<Vec<Literal>> = BTreeSet::new();
    let mut out = Vec::new();
    for c in constraints {
        let c = rename_apart(c, &rule_vars);
        for (i, l) in c.body.iter().enumerate() {
            let Literal::Pos(a_c) = l else { continue };
            let Some(gamma) = unify(head, a_c) else { continue };
            let mut literals: Vec<Literal> = c
                .body
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, l)| l.substitute(&gamma))
                .collect();
            // the unifier may pin rule variables; keep that as explicit equalities
            for v in &rule_vars {
                let t = gamma.resolve(&Term::Var(v.clone()));
                if t != Term::Var(v.clone()) {
                    literals.push(Literal::cmp(Term::Var(v.clone()), CmpOp::Eq, t));
                }
            }
            if seen.insert(canonical_form(&literals, &rule_vars)) {
                out.push(FilterCondition {
                    literals,
                    source: c.clone(),
                    matched: i,
                    unifier: gamma,
                });
            }
        }
    }
    out
}

/// The literal that is true exactly when the condition is false, if it can be
/// written as a single aggregate.
pub fn negate_condition(fc: &FilterCondition) -> Option<Literal> {
    let aggs = fc.literals.iter().filter(|l| l.is_aggregate()).count();
    match (aggs, fc.literals.as_slice()) {
        (0, _) => Some(Literal::Agg(Aggregate {
            left: None,
            elements: vec![AggregateElement {
                terms: vec![Term::Int(1)],
                condition: fc.literals.clone(),
            }],
            right: Some(RightGuard {
                op: CmpOp::Lt,
                term: Term::Int(1),
            }),
        })),
        (1, [Literal::Agg(agg)]) => {
            if agg.left.is_some() && agg.right.is_some() {
                warn!("skipping filter with a two-sided aggregate guard: {fc}");
                return None;
            }
            let mut neg = agg.clone();
            if let Some(g) = &mut neg.left {
                g.op = g.op.negate();
            }
            if let Some(g) = &mut neg.right {
                g.op = g.op.negate();
            }
            Some(Literal::Agg(neg))
        }
        _ => {
            warn!("skipping filter mixing aggregate and other literals: {fc}");
            None
        }
    }
}

#[derive(Clone, Debug)]
pub struct CagOptions {
    pub unfold_depth: usize,
    /// Only rewrite guess rules for these head predicates.
    pub targets: Option<BTreeSet<String>>,
}

impl Default for CagOptions {
    fn default() -> Self {
        CagOptions {
            unfold_depth: DEFAULT_UNFOLD_DEPTH,
            targets: None,
        }
    }
}

/// What the rewrite did to one guess rule.
#[derive(Clone, Debug)]
pub struct RuleReport {
    pub rule: Rule,
    pub conditions: Vec<FilterCondition>,
    /// Per condition, the literal added to the rule, or `None` when skipped.
    pub added: Vec<Option<Literal>>,
}

#[derive(Clone, Debug, Default)]
pub struct CagReport {
    pub derived_constraints: Vec<Rule>,
    pub rules: Vec<RuleReport>,
}

impl fmt::Display for CagReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.derived_constraints {
            writeln!(f, "derived constraint: {c}")?;
        }
        for r in &self.rules {
            writeln!(f, "rule: {}", r.rule)?;
            for (fc, lit) in r.conditions.iter().zip(&r.added) {
                let lits: Vec<String> = fc.literals.iter().map(|l| l.to_string()).collect();
                writeln!(f, "  condition: {}", lits.join(", "))?;
                writeln!(f, "    source: {}", fc.source)?;
                match lit {
                    Some(l) => writeln!(f, "    added: {l}")?,
                    None => writeln!(f, "    skipped")?,
                }
            }
        }
        Ok(())
    }
}

/// Rewrite every (targeted) guess rule of `p` into its filtered version.
pub fn cag_rewrite(p: &Program, opts: &CagOptions) -> Program {
    cag_rewrite_report(p, opts).0
}

pub fn cag_rewrite_report(p: &Program, opts: &CagOptions) -> (Program, CagReport) {
    let derived = unfold_constraints(p, opts.unfold_depth);
    let mut sources: Vec<Rule> = p.constraints().cloned().collect();
    sources.extend(derived.iter().cloned());
    let mut report = CagReport {
        derived_constraints: derived,
        rules: Vec::new(),
    };
    let rules = p
        .rules
        .iter()
        .map(|r| {
            let targeted = is_guess_rule(r)
                && opts
                    .targets
                    .as_ref()
                    .is_none_or(|t| r.head.as_ref().is_some_and(|h| t.contains(&*h.predicate)));
            if !targeted {
                return r.clone();
            }
            let conditions = filter_conditions_from(r, &sources);
            if conditions.is_empty() {
                return r.clone();
            }
            let added: Vec<Option<Literal>> = conditions.iter().map(negate_condition).collect();
            let mut filtered = r.clone();
            filtered.body.extend(added.iter().flatten().cloned());
            report.rules.push(RuleReport {
                rule: r.clone(),
                conditions,
                added,
            });
            filtered
        })
        .collect();
    (
        Program {
            rules,
            facts: p.facts.clone(),
        },
        report,
    )
}

fn base_name(v: &str) -> &str {
    v.trim_end_matches(|c: char| c.is_ascii_digit())
}

fn fresh_name(v: &str, used: &BTreeSet<Name>) -> Name {
    let base = base_name(v);
    (1..)
        .map(|n| Name::from(format!("{base}{n}")))
        .find(|cand| !used.contains(cand))
        .unwrap()
}

/// Rename the variables of `r` selected by `pick` to fresh names that avoid
/// `avoid` and every variable of `r`.
fn rename_where(r: &Rule, avoid: &BTreeSet<Name>, pick: impl Fn(&Name) -> bool) -> Rule {
    let vars = r.variables();
    let mut used: BTreeSet<Name> = avoid.union(&vars).cloned().collect();
    let mut s = Substitution::new();
    for v in vars.iter().filter(|v| pick(v)) {
        let fresh = fresh_name(v, &used);
        used.insert(fresh.clone());
        s.bind(v.clone(), Term::Var(fresh));
    }
    r.substitute(&s)
}

/// `c` with only the variables that clash with `avoid` renamed.
pub(crate) fn rename_apart(c: &Rule, avoid: &BTreeSet<Name>) -> Rule {
    rename_where(c, avoid, |v| avoid.contains(v))
}

/// `r` with every variable renamed to a fresh one.
pub(crate) fn fresh_variant(r: &Rule, avoid: &BTreeSet<Name>) -> Rule {
    rename_where(r, avoid, |_| true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn module_frame() -> Program {
        parse_program(include_str!("../../fixtures/module_frame.lp")).unwrap()
    }

    fn hcp() -> Program {
        parse_program(include_str!("../../fixtures/hcp.lp")).unwrap()
    }

    fn body(src: &str) -> Vec<Literal> {
        parse_program(&format!(":- {src}.")).unwrap().rules.remove(0).body
    }

    #[test]
    fn partition_hcp() {
        let part = guess_check_partition(&hcp());
        assert_eq!(part.guess.len(), 8);
        assert_eq!(part.guess.len() + part.check.len(), hcp().rules.len());
        assert!(part.guess.iter().all(|r| r.head.is_some() && r.has_negation()));
    }

    #[test]
    fn partition_module_frame_and_constraints_only() {
        let part = guess_check_partition(&module_frame());
        let heads: Vec<String> = part
            .guess
            .iter()
            .map(|r| r.head.as_ref().unwrap().predicate.to_string())
            .collect();
        assert_eq!(heads, ["mINf", "mINf_n"]);
        let only = parse_program(":- a. :- b, not c.").unwrap();
        assert!(guess_check_partition(&only).guess.is_empty());
    }

    #[test]
    fn module_frame_conditions() {
        let p = module_frame();
        let r = &p.rules[0];
        let fcs = filter_conditions(r, &p);
        assert_eq!(fcs.len(), 2);
        assert_eq!(
            fcs[0].literals,
            body("module(X), module(M2), frame(Y), mINf(M2,Y), X <> M2")
        );
        assert_eq!(
            fcs[1].literals,
            body("module(X), frame(Y), frame(F2), mINf(X,F2), Y <> F2")
        );
        for fc in &fcs {
            let mut expected = fc.source.body.clone();
            expected.remove(fc.matched);
            let expected: Vec<Literal> = expected.iter().map(|l| l.substitute(&fc.unifier)).collect();
            assert_eq!(fc.literals, expected);
        }
    }

    #[test]
    fn unrelated_head_has_no_conditions() {
        let p = parse_program("a(X) :- d(X), not b(X). :- c(X).").unwrap();
        assert!(filter_conditions(&p.rules[0], &p).is_empty());
    }

    #[test]
    fn hcp_cabinet_thing_conditions() {
        let p = hcp();
        let r = p
            .rules
            .iter()
            .find(|r| r.head.as_ref().unwrap().predicate.as_ref() == "cabinetTOthing")
            .unwrap();
        let fcs = filter_conditions(r, &p);
        assert_eq!(fcs.len(), 6);
        let golden = parse_program(include_str!("../../tests/data/hcp_filtered_cabinet_rule.lp")).unwrap();
        let fixed = r.variables();
        let canon = |lits: &[Literal]| canonical_form(lits, &fixed);
        let expected: BTreeSet<Vec<Literal>> = golden.rules[0].body[3..]
            .iter()
            .map(|l| match l {
                Literal::Agg(a) => canon(&a.elements[0].condition),
                _ => unreachable!(),
            })
            .collect();
        let got: BTreeSet<Vec<Literal>> = fcs.iter().map(|fc| canon(&fc.literals)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn constant_in_constraint_adds_equality() {
        let p = parse_program("p(X) :- d(X), not q(X). :- p(1), r.").unwrap();
        let fcs = filter_conditions(&p.rules[0], &p);
        assert_eq!(fcs[0].literals, body("r, X = 1"));
    }

    #[test]
    fn negation_of_plain_condition() {
        let p = module_frame();
        let fcs = filter_conditions(&p.rules[0], &p);
        let lit = negate_condition(&fcs[0]).unwrap();
        assert_eq!(
            lit.to_string(),
            "#count { 1 : module(X), module(M2), frame(Y), mINf(M2,Y), X <> M2 } < 1"
        );
    }

    #[test]
    fn negation_of_single_aggregate() {
        let fc = FilterCondition {
            literals: body("5 <= #count { C : roomTOcabinet(R,C) }"),
            source: Rule::new(None, vec![]),
            matched: 0,
            unifier: Substitution::new(),
        };
        assert_eq!(
            negate_condition(&fc).unwrap().to_string(),
            "5 > #count { C : roomTOcabinet(R,C) }"
        );
        let mixed = FilterCondition {
            literals: body("p(X), #count { 1 : q(X) } < 1"),
            ..fc.clone()
        };
        assert_eq!(negate_condition(&mixed), None);
        let two_sided = FilterCondition {
            literals: body("1 < #count { 1 : q(X) } < 3"),
            ..fc
        };
        assert_eq!(negate_condition(&two_sided), None);
    }

    #[test]
    fn module_frame_rewrite_golden() {
        let out = cag_rewrite(&module_frame(), &CagOptions::default());
        let golden = parse_program(include_str!("../../tests/data/module_frame_filtered_rule.lp")).unwrap();
        assert_eq!(out.rules[0], golden.rules[0]);
        assert_eq!(out.rules[1..], module_frame().rules[1..]);
        assert_eq!(out.facts, module_frame().facts);
    }

    #[test]
    fn no_guess_rules_identity() {
        let p = parse_program("a(1). b(X) :- a(X). :- b(2).").unwrap();
        assert_eq!(cag_rewrite(&p, &CagOptions::default()), p);
    }

    #[test]
    fn targets_restrict_rewrite() {
        let opts = CagOptions {
            targets: Some(["room".to_string()].into_iter().collect()),
            ..CagOptions::default()
        };
        let out = cag_rewrite(&hcp(), &opts);
        let changed: Vec<&Rule> = out
            .rules
            .iter()
            .zip(&hcp().rules)
            .filter(|(a, b)| a != b)
            .map(|(a, _)| a)
            .collect();
        assert_eq!(changed.len(), 1);
        assert_eq!(changed[0].head.as_ref().unwrap().predicate.as_ref(), "room");
    }

    #[test]
    fn fresh_names() {
        let used: BTreeSet<Name> = ["T", "T1", "C"].into_iter().map(Name::from).collect();
        assert_eq!(&*fresh_name("T", &used), "T2");
        assert_eq!(&*fresh_name("C", &used), "C1");
        assert_eq!(&*fresh_name("T1", &used), "T2");
    }
}
