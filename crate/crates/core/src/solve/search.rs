//! Backtracking search over a three-valued assignment.
//!
//! Decisions are made on atoms that occur under negation or inside an
//! aggregate, in canonical order, true before false. Once those are fixed the
//! reduct is determined, so every leaf has exactly one candidate: the least
//! model of that reduct. Propagation only prunes; it never admits a candidate
//! that the leaf check would reject.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use super::{timed_out, AnswerSet};
use crate::error::{Error, Result};
use crate::ground::GroundProgram;
use crate::lang::{Aggregate, Atom, Literal, Term};

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Stop after this many models; `None` enumerates all of them.
    pub limit: Option<usize>,
    pub deadline: Option<Instant>,
}

/// Up to `limit` stable models of `g` in search order.
pub fn solve(g: &GroundProgram, limit: usize) -> Result<Vec<AnswerSet>> {
    solve_with(
        g,
        &SolveOptions {
            limit: Some(limit),
            deadline: None,
        },
    )
}

/// Every stable model of `g`, sorted.
pub fn solve_all(g: &GroundProgram) -> Result<Vec<AnswerSet>> {
    let mut models = solve_with(g, &SolveOptions::default())?;
    models.sort();
    Ok(models)
}

pub fn solve_with(g: &GroundProgram, opts: &SolveOptions) -> Result<Vec<AnswerSet>> {
    let start = Instant::now();
    let mut s = Solver::new(g);
    let mut out = Vec::new();
    if opts.limit == Some(0) {
        return Ok(out);
    }
    let mut ok = s.init();
    loop {
        if timed_out(opts.deadline) {
            return Err(Error::Timeout {
                elapsed: start.elapsed(),
            });
        }
        if ok {
            match s.next_branch_atom() {
                Some(a) => {
                    s.decide(a);
                    ok = s.propagate();
                    continue;
                }
                None => {
                    if let Some(m) = s.leaf_model() {
                        out.push(AnswerSet {
                            atoms: m.into_iter().map(|i| s.atoms[i as usize].clone()).collect(),
                        });
                        if opts.limit.is_some_and(|l| out.len() >= l) {
                            return Ok(out);
                        }
                    }
                }
            }
        }
        match s.backtrack() {
            Some(propagated) => ok = propagated,
            None => return Ok(out),
        }
    }
}

const UNKNOWN: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Lit {
    Pos(u32),
    Neg(u32),
    Agg(u32),
}

struct Elem {
    pos: Vec<u32>,
    neg: Vec<u32>,
}

struct Agg {
    groups: Vec<Vec<Elem>>,
    source: Aggregate,
}

struct CRule {
    head: Option<u32>,
    body: Vec<Lit>,
}

struct Conflict;

type Prop = std::result::Result<(), Conflict>;

struct Solver {
    atoms: Vec<Atom>,
    rules: Vec<CRule>,
    aggs: Vec<Agg>,
    facts: Vec<u32>,
    /// Rules to revisit when an atom changes.
    watch: Vec<Vec<u32>>,
    /// Rules with the atom as head.
    supports: Vec<Vec<u32>>,
    branch: Vec<u32>,
    vals: Vec<i8>,
    trail: Vec<u32>,
    queue: Vec<u32>,
    /// (trail length before the decision, atom, alternative already tried)
    decisions: Vec<(usize, u32, bool)>,
    /// Set when the program holds a rule that is violated regardless of the assignment.
    dead: bool,
}

impl Solver {
    fn new(g: &GroundProgram) -> Solver {
        let atoms: Vec<Atom> = g.atoms().into_iter().collect();
        let ids: HashMap<&Atom, u32> = atoms.iter().enumerate().map(|(i, a)| (a, i as u32)).collect();
        let n = atoms.len();
        let mut rules = Vec::new();
        let mut aggs: Vec<Agg> = Vec::new();
        let mut watch: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut supports: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut branch = BTreeSet::new();
        'rules: for r in &g.rules {
            let ri = rules.len() as u32;
            let mut body = Vec::with_capacity(r.body.len());
            let mut touched: Vec<u32> = Vec::new();
            for l in &r.body {
                match l {
                    Literal::Pos(a) => {
                        body.push(Lit::Pos(ids[a]));
                        touched.push(ids[a]);
                    }
                    Literal::Neg(a) => {
                        body.push(Lit::Neg(ids[a]));
                        touched.push(ids[a]);
                        branch.insert(ids[a]);
                    }
                    Literal::Cmp { lhs, op, rhs } => {
                        if !op.eval(lhs, rhs) {
                            continue 'rules;
                        }
                    }
                    Literal::Agg(agg) => {
                        let mut by_tuple: HashMap<&[Term], usize> = HashMap::new();
                        let mut groups: Vec<Vec<Elem>> = Vec::new();
                        'elems: for e in &agg.elements {
                            let mut el = Elem {
                                pos: Vec::new(),
                                neg: Vec::new(),
                            };
                            for c in &e.condition {
                                match c {
                                    Literal::Pos(a) => el.pos.push(ids[a]),
                                    Literal::Neg(a) => el.neg.push(ids[a]),
                                    Literal::Cmp { lhs, op, rhs } => {
                                        if !op.eval(lhs, rhs) {
                                            continue 'elems;
                                        }
                                    }
                                    Literal::Agg(_) => {}
                                }
                            }
                            touched.extend(el.pos.iter().chain(&el.neg));
                            branch.extend(el.pos.iter().chain(&el.neg));
                            let gi = *by_tuple.entry(&e.terms).or_insert_with(|| {
                                groups.push(Vec::new());
                                groups.len() - 1
                            });
                            groups[gi].push(el);
                        }
                        body.push(Lit::Agg(aggs.len() as u32));
                        aggs.push(Agg {
                            groups,
                            source: agg.clone(),
                        });
                    }
                }
            }
            let head = r.head.as_ref().map(|h| ids[h]);
            if let Some(h) = head {
                touched.push(h);
                supports[h as usize].push(ri);
            }
            touched.sort_unstable();
            touched.dedup();
            for a in touched {
                watch[a as usize].push(ri);
            }
            rules.push(CRule { head, body });
        }
        Solver {
            facts: g.facts.iter().map(|f| ids[f]).collect(),
            atoms,
            rules,
            aggs,
            watch,
            supports,
            branch: branch.into_iter().collect(),
            vals: vec![UNKNOWN; n],
            trail: Vec::new(),
            queue: Vec::new(),
            decisions: Vec::new(),
            dead: false,
        }
    }

    /// Root-level propagation. Returns false when the program has no model.
    fn init(&mut self) -> bool {
        let facts = self.facts.clone();
        let mut ok = facts.iter().all(|&f| self.assign(f, TRUE).is_ok());
        if ok {
            ok = (0..self.rules.len() as u32).all(|r| self.visit_rule(r).is_ok())
                && (0..self.atoms.len() as u32).all(|a| self.check_support(a).is_ok());
        }
        ok = ok && self.propagate();
        if !ok {
            self.dead = true;
        }
        ok
    }

    fn assign(&mut self, a: u32, v: i8) -> Prop {
        match self.vals[a as usize] {
            UNKNOWN => {
                self.vals[a as usize] = v;
                self.trail.push(a);
                self.queue.push(a);
                Ok(())
            }
            cur if cur == v => Ok(()),
            _ => Err(Conflict),
        }
    }

    fn propagate(&mut self) -> bool {
        while let Some(a) = self.queue.pop() {
            let rules = std::mem::take(&mut self.watch[a as usize]);
            let mut res = rules.iter().try_for_each(|&r| self.visit_rule(r));
            self.watch[a as usize] = rules;
            if res.is_ok() {
                res = self.check_support(a);
            }
            if res.is_err() {
                self.queue.clear();
                return false;
            }
        }
        true
    }

    fn lit_value(&self, l: Lit) -> i8 {
        match l {
            Lit::Pos(a) => self.vals[a as usize],
            Lit::Neg(a) => -self.vals[a as usize],
            Lit::Agg(g) => self.agg_value(g),
        }
    }

    fn elem_value(&self, e: &Elem) -> i8 {
        let mut v = TRUE;
        for &a in &e.pos {
            match self.vals[a as usize] {
                FALSE => return FALSE,
                UNKNOWN => v = UNKNOWN,
                _ => {}
            }
        }
        for &a in &e.neg {
            match self.vals[a as usize] {
                TRUE => return FALSE,
                UNKNOWN => v = UNKNOWN,
                _ => {}
            }
        }
        v
    }

    fn group_value(&self, g: &[Elem]) -> i8 {
        let mut v = FALSE;
        for e in g {
            match self.elem_value(e) {
                TRUE => return TRUE,
                UNKNOWN => v = UNKNOWN,
                _ => {}
            }
        }
        v
    }

    /// Bounds on the count: groups certainly counted, groups possibly counted.
    fn agg_bounds(&self, g: u32) -> (usize, usize) {
        let mut lo = 0;
        let mut hi = 0;
        for grp in &self.aggs[g as usize].groups {
            match self.group_value(grp) {
                TRUE => {
                    lo += 1;
                    hi += 1;
                }
                UNKNOWN => hi += 1,
                _ => {}
            }
        }
        (lo, hi)
    }

    fn agg_value(&self, g: u32) -> i8 {
        let (lo, hi) = self.agg_bounds(g);
        let src = &self.aggs[g as usize].source;
        let first = src.guards_hold(lo);
        if (lo + 1..=hi).all(|n| src.guards_hold(n) == first) {
            if first {
                TRUE
            } else {
                FALSE
            }
        } else {
            UNKNOWN
        }
    }

    fn force_lit(&mut self, l: Lit, v: i8) -> Prop {
        match l {
            Lit::Pos(a) => self.assign(a, v),
            Lit::Neg(a) => self.assign(a, -v),
            Lit::Agg(g) => self.force_agg(g, v == TRUE),
        }
    }

    /// Narrow the aggregate's elements so that its truth can become `want`.
    fn force_agg(&mut self, g: u32, want: bool) -> Prop {
        let (lo, hi) = self.agg_bounds(g);
        let src = &self.aggs[g as usize].source;
        let ok: Vec<usize> = (lo..=hi).filter(|&n| src.guards_hold(n) == want).collect();
        let (Some(&min_ok), Some(&max_ok)) = (ok.first(), ok.last()) else {
            return Err(Conflict);
        };
        if lo == hi {
            return Ok(());
        }
        let mut forced: Vec<(u32, i8)> = Vec::new();
        for grp in &self.aggs[g as usize].groups {
            if self.group_value(grp) != UNKNOWN {
                continue;
            }
            if min_ok == hi {
                // every open group has to be counted
                let mut open = grp.iter().filter(|e| self.elem_value(e) != FALSE);
                if let (Some(e), None) = (open.next(), open.next()) {
                    forced.extend(e.pos.iter().map(|&a| (a, TRUE)));
                    forced.extend(e.neg.iter().map(|&a| (a, FALSE)));
                }
            } else if max_ok == lo {
                // no open group may be counted
                for e in grp.iter().filter(|e| self.elem_value(e) == UNKNOWN) {
                    let mut open = e
                        .pos
                        .iter()
                        .filter(|&&a| self.vals[a as usize] == UNKNOWN)
                        .map(|&a| (a, FALSE))
                        .chain(
                            e.neg
                                .iter()
                                .filter(|&&a| self.vals[a as usize] == UNKNOWN)
                                .map(|&a| (a, TRUE)),
                        );
                    if let (Some(f), None) = (open.next(), open.next()) {
                        forced.push(f);
                    }
                }
            }
        }
        forced.into_iter().try_for_each(|(a, v)| self.assign(a, v))
    }

    fn visit_rule(&mut self, r: u32) -> Prop {
        let rule = &self.rules[r as usize];
        let mut unknown: Option<Lit> = None;
        let mut n_unknown = 0;
        for &l in &rule.body {
            match self.lit_value(l) {
                FALSE => {
                    return match rule.head {
                        Some(h) => self.check_support(h),
                        None => Ok(()),
                    };
                }
                UNKNOWN => {
                    n_unknown += 1;
                    unknown = Some(l);
                }
                _ => {}
            }
        }
        let head_val = rule.head.map_or(FALSE, |h| self.vals[h as usize]);
        if n_unknown == 0 {
            return match rule.head {
                None => Err(Conflict),
                Some(h) => self.assign(h, TRUE),
            };
        }
        if head_val == FALSE && n_unknown == 1 {
            return self.force_lit(unknown.unwrap(), FALSE);
        }
        if head_val == TRUE {
            return self.check_support(rule.head.unwrap());
        }
        Ok(())
    }

    fn body_false(&self, r: u32) -> bool {
        self.rules[r as usize].body.iter().any(|&l| self.lit_value(l) == FALSE)
    }

    fn check_support(&mut self, a: u32) -> Prop {
        let v = self.vals[a as usize];
        if v == FALSE || self.facts.binary_search(&a).is_ok() {
            return Ok(());
        }
        let mut live = self.supports[a as usize].iter().filter(|&&r| !self.body_false(r));
        let first = live.next().copied();
        let second = live.next().copied();
        match (first, second) {
            (None, _) => self.assign(a, FALSE),
            (Some(r), None) if v == TRUE => {
                let body = self.rules[r as usize].body.clone();
                body.into_iter().try_for_each(|l| self.force_lit(l, TRUE))
            }
            _ => Ok(()),
        }
    }

    fn next_branch_atom(&self) -> Option<u32> {
        self.branch.iter().copied().find(|&a| self.vals[a as usize] == UNKNOWN)
    }

    fn decide(&mut self, a: u32) {
        self.decisions.push((self.trail.len(), a, false));
        self.assign(a, TRUE).ok();
    }

    fn undo_to(&mut self, len: usize) {
        for a in self.trail.drain(len..) {
            self.vals[a as usize] = UNKNOWN;
        }
        self.queue.clear();
    }

    /// Flip the most recent untried decision. Returns `None` when the search
    /// space is exhausted, otherwise whether propagation succeeded.
    fn backtrack(&mut self) -> Option<bool> {
        if self.dead {
            return None;
        }
        while let Some((len, a, tried)) = self.decisions.pop() {
            self.undo_to(len);
            if !tried {
                self.decisions.push((len, a, true));
                self.assign(a, FALSE).ok();
                return Some(self.propagate());
            }
        }
        None
    }

    /// The unique candidate for a complete branch assignment, if it is stable
    /// and agrees with everything propagated so far.
    fn leaf_model(&self) -> Option<Vec<u32>> {
        let n = self.atoms.len();
        let mut model = vec![false; n];
        let mut missing: Vec<usize> = vec![usize::MAX; self.rules.len()];
        let mut watch: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut stack: Vec<u32> = Vec::new();
        for &f in &self.facts {
            model[f as usize] = true;
            stack.push(f);
        }
        let mut constraints = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            let context = r.body.iter().all(|&l| match l {
                Lit::Pos(_) => true,
                other => self.lit_value(other) == TRUE,
            });
            if !context {
                continue;
            }
            let Some(h) = r.head else {
                constraints.push(ri);
                continue;
            };
            let pos: Vec<u32> = r
                .body
                .iter()
                .filter_map(|l| match l {
                    Lit::Pos(a) => Some(*a),
                    _ => None,
                })
                .collect();
            missing[ri] = pos.len();
            for a in pos {
                watch[a as usize].push(ri as u32);
            }
            if missing[ri] == 0 && !model[h as usize] {
                model[h as usize] = true;
                stack.push(h);
            }
        }
        while let Some(a) = stack.pop() {
            for &ri in &watch[a as usize] {
                missing[ri as usize] -= 1;
                if missing[ri as usize] == 0 {
                    let h = self.rules[ri as usize].head.unwrap();
                    if !model[h as usize] {
                        model[h as usize] = true;
                        stack.push(h);
                    }
                }
            }
        }
        for (i, &v) in self.vals.iter().enumerate() {
            if v != UNKNOWN && (v == TRUE) != model[i] {
                return None;
            }
        }
        for ri in constraints {
            let violated = self.rules[ri].body.iter().all(|&l| match l {
                Lit::Pos(a) => model[a as usize],
                _ => true,
            });
            if violated {
                return None;
            }
        }
        Some((0..n as u32).filter(|&i| model[i as usize]).collect())
    }
}
