//! Semi-naive bottom-up instantiation with simplification.
//!
//! Grounding runs in three phases:
//!
//! 1. Instantiate rules bottom-up over the atoms derivable when negation and
//!    aggregates are ignored (semi-naive rounds, indexed joins).
//! 2. Ground aggregate elements against the final set of derivable atoms.
//! 3. Alternate between a lower bound (`certain`) and an upper bound
//!    (`possible`) on every stable model until both are stable, then emit the
//!    rules simplified against those bounds.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use super::{eval_cmp, GroundOptions, GroundProgram};
use crate::error::{Error, Result};
use crate::lang::{
    check_safety, Aggregate, AggregateElement, Atom, CmpOp, Literal, Name, Program, Rule, Substitutable, Substitution,
    Term,
};

/// Ground `p` with default options.
pub fn ground(p: &Program) -> Result<GroundProgram> {
    ground_with(p, &GroundOptions::default())
}

pub fn ground_with(p: &Program, opts: &GroundOptions) -> Result<GroundProgram> {
    for r in &p.rules {
        if let Some(v) = check_safety(r).into_iter().next() {
            return Err(Error::Unsafe {
                rule: r.to_string(),
                detail: v.to_string(),
            });
        }
    }
    let mut g = Grounder::new(opts);
    for f in &p.facts {
        g.store.insert(f.clone(), 0);
    }
    let instances = g.instantiate(&p.rules)?;
    let ground_rules = g.ground_aggregates(&p.rules, instances)?;
    Ok(simplify(&g.store, ground_rules, &p.facts, opts.keep_symmetric))
}

// ---------------------------------------------------------------------------
// atom store

#[derive(Default)]
struct Store {
    atoms: Vec<Atom>,
    ids: HashMap<Atom, u32>,
    stamp: Vec<u32>,
    sig_ids: HashMap<(Name, usize), u32>,
    by_sig: Vec<Vec<u32>>,
    by_arg: HashMap<(u32, usize, Term), Vec<u32>>,
}

impl Store {
    fn sig(&self, pred: &Name, arity: usize) -> Option<u32> {
        self.sig_ids.get(&(pred.clone(), arity)).copied()
    }

    fn insert(&mut self, a: Atom, stamp: u32) -> bool {
        if self.ids.contains_key(&a) {
            return false;
        }
        let id = self.atoms.len() as u32;
        let next_sig = self.by_sig.len() as u32;
        let sig = *self.sig_ids.entry(a.signature()).or_insert(next_sig);
        if sig == next_sig {
            self.by_sig.push(Vec::new());
        }
        self.by_sig[sig as usize].push(id);
        for (pos, t) in a.args.iter().enumerate() {
            self.by_arg.entry((sig, pos, t.clone())).or_default().push(id);
        }
        self.ids.insert(a.clone(), id);
        self.atoms.push(a);
        self.stamp.push(stamp);
        true
    }
}

// ---------------------------------------------------------------------------
// compiled bodies and joins

#[derive(Clone, Debug)]
enum Slot {
    Const(Term),
    Var(usize),
}

#[derive(Debug)]
struct CAtom {
    pred: Name,
    args: Vec<Slot>,
}

#[derive(Debug)]
struct CCmp {
    lhs: Slot,
    op: CmpOp,
    rhs: Slot,
}

/// Positive atoms and builtins of a conjunction, with variables numbered.
#[derive(Debug)]
struct Conjunction {
    vars: Vec<Name>,
    atoms: Vec<CAtom>,
    cmps: Vec<CCmp>,
}

impl Conjunction {
    fn compile<'a>(
        atoms: impl IntoIterator<Item = &'a Atom>,
        cmps: impl IntoIterator<Item = (&'a Term, CmpOp, &'a Term)>,
    ) -> Conjunction {
        let mut vars: Vec<Name> = Vec::new();
        let slot = |t: &Term, vars: &mut Vec<Name>| match t {
            Term::Var(v) => {
                let idx = vars.iter().position(|x| x == v).unwrap_or_else(|| {
                    vars.push(v.clone());
                    vars.len() - 1
                });
                Slot::Var(idx)
            }
            other => Slot::Const(other.clone()),
        };
        let atoms: Vec<CAtom> = atoms
            .into_iter()
            .map(|a| CAtom {
                pred: a.predicate.clone(),
                args: a.args.iter().map(|t| slot(t, &mut vars)).collect(),
            })
            .collect();
        let cmps = cmps
            .into_iter()
            .map(|(l, op, r)| CCmp {
                lhs: slot(l, &mut vars),
                op,
                rhs: slot(r, &mut vars),
            })
            .collect();
        Conjunction { vars, atoms, cmps }
    }

    fn substitution(&self, env: &[Option<Term>]) -> Substitution {
        self.vars
            .iter()
            .zip(env)
            .filter_map(|(v, t)| t.as_ref().map(|t| (v.clone(), t.clone())))
            .collect()
    }
}

fn slot_value<'a>(s: &'a Slot, env: &'a [Option<Term>]) -> Option<&'a Term> {
    match s {
        Slot::Const(t) => Some(t),
        Slot::Var(i) => env[*i].as_ref(),
    }
}

struct Join<'a> {
    store: &'a Store,
    conj: &'a Conjunction,
    /// Inclusive stamp range each atom must fall into.
    ranges: Vec<(u32, u32)>,
    env: Vec<Option<Term>>,
    done: Vec<bool>,
    steps: u64,
    deadline: Option<Instant>,
    started: Instant,
}

impl<'a> Join<'a> {
    fn new(store: &'a Store, conj: &'a Conjunction, ranges: Vec<(u32, u32)>, deadline: Option<Instant>) -> Self {
        Join {
            store,
            conj,
            ranges,
            env: vec![None; conj.vars.len()],
            done: vec![false; conj.atoms.len()],
            steps: 0,
            deadline,
            started: Instant::now(),
        }
    }

    fn cmps_ok(&self) -> bool {
        self.conj.cmps.iter().all(
            |c| match (slot_value(&c.lhs, &self.env), slot_value(&c.rhs, &self.env)) {
                (Some(l), Some(r)) => eval_cmp(l, c.op, r),
                _ => true,
            },
        )
    }

    fn run(&mut self, f: &mut dyn FnMut(&[Option<Term>]) -> Result<()>) -> Result<()> {
        if !self.cmps_ok() {
            return Ok(());
        }
        // pick the pending atom with the most bound arguments
        let mut best: Option<(usize, usize)> = None;
        for (i, a) in self.conj.atoms.iter().enumerate() {
            if self.done[i] {
                continue;
            }
            let bound = a.args.iter().filter(|s| slot_value(s, &self.env).is_some()).count();
            if best.is_none_or(|(_, b)| bound > b) {
                best = Some((i, bound));
            }
        }
        let Some((idx, _)) = best else {
            return f(&self.env);
        };
        let atom = &self.conj.atoms[idx];
        let Some(sig) = self.store.sig(&atom.pred, atom.args.len()) else {
            return Ok(());
        };
        let mut candidates: &[u32] = &self.store.by_sig[sig as usize];
        for (pos, s) in atom.args.iter().enumerate() {
            if let Some(t) = slot_value(s, &self.env) {
                match self.store.by_arg.get(&(sig, pos, t.clone())) {
                    Some(list) if list.len() < candidates.len() => candidates = list,
                    Some(_) => {}
                    None => return Ok(()),
                }
            }
        }
        let (lo, hi) = self.ranges[idx];
        self.done[idx] = true;
        let mut bound_here: Vec<usize> = Vec::with_capacity(atom.args.len());
        for &id in candidates {
            self.steps += 1;
            if self.steps.is_multiple_of(4096) {
                if let Some(d) = self.deadline {
                    if Instant::now() >= d {
                        return Err(Error::Timeout {
                            elapsed: self.started.elapsed(),
                        });
                    }
                }
            }
            let stamp = self.store.stamp[id as usize];
            if stamp < lo || stamp > hi {
                continue;
            }
            let ground = &self.store.atoms[id as usize];
            let mut ok = true;
            for (s, t) in atom.args.iter().zip(&ground.args) {
                match s {
                    Slot::Const(c) => {
                        if c != t {
                            ok = false;
                            break;
                        }
                    }
                    Slot::Var(v) => match &self.env[*v] {
                        Some(b) => {
                            if b != t {
                                ok = false;
                                break;
                            }
                        }
                        None => {
                            self.env[*v] = Some(t.clone());
                            bound_here.push(*v);
                        }
                    },
                }
            }
            if ok {
                self.run(f)?;
            }
            for v in bound_here.drain(..) {
                self.env[v] = None;
            }
        }
        self.done[idx] = false;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// phase 1 and 2

struct Grounder<'o> {
    store: Store,
    opts: &'o GroundOptions,
    instances: u64,
}

struct CompiledRule {
    body: Conjunction,
}

/// A rule instance with its aggregates still to be grounded.
struct Instance {
    rule: usize,
    subst: Substitution,
}

impl<'o> Grounder<'o> {
    fn new(opts: &'o GroundOptions) -> Self {
        Grounder {
            store: Store::default(),
            opts,
            instances: 0,
        }
    }

    fn count_instance(&mut self) -> Result<()> {
        self.instances += 1;
        if self.instances > self.opts.instance_cap {
            return Err(Error::UniverseTooLarge {
                limit: self.opts.instance_cap,
            });
        }
        Ok(())
    }

    fn instantiate(&mut self, rules: &[Rule]) -> Result<Vec<Instance>> {
        let compiled: Vec<CompiledRule> = rules
            .iter()
            .map(|r| CompiledRule {
                body: Conjunction::compile(
                    r.positive_body(),
                    r.body.iter().filter_map(|l| match l {
                        Literal::Cmp { lhs, op, rhs } => Some((lhs, *op, rhs)),
                        _ => None,
                    }),
                ),
            })
            .collect();
        let mut out = Vec::new();
        let mut pending: Vec<Atom> = Vec::new();

        // rules without positive atoms fire once, before any round
        for (ri, (rule, c)) in rules.iter().zip(&compiled).enumerate() {
            if !c.body.atoms.is_empty() {
                continue;
            }
            let join_ok = {
                let j = Join::new(&self.store, &c.body, Vec::new(), None);
                j.cmps_ok()
            };
            if join_ok {
                self.count_instance()?;
                if let Some(h) = &rule.head {
                    pending.push(h.clone());
                }
                out.push(Instance {
                    rule: ri,
                    subst: Substitution::new(),
                });
            }
        }
        for a in pending.drain(..) {
            self.store.insert(a, 0);
        }

        let mut round: u32 = 0;
        loop {
            let mut found: Vec<(usize, Substitution)> = Vec::new();
            for (ri, c) in compiled.iter().enumerate() {
                let n = c.body.atoms.len();
                for i in 0..n {
                    let ranges: Vec<(u32, u32)> = (0..n)
                        .map(|j| match j.cmp(&i) {
                            std::cmp::Ordering::Less => (0, round.wrapping_sub(1)),
                            std::cmp::Ordering::Equal => (round, round),
                            std::cmp::Ordering::Greater => (0, round),
                        })
                        .collect();
                    if i > 0 && round == 0 {
                        // nothing is older than round 0
                        continue;
                    }
                    let mut join = Join::new(&self.store, &c.body, ranges, self.opts.deadline);
                    join.run(&mut |env| {
                        found.push((ri, c.body.substitution(env)));
                        Ok(())
                    })?;
                }
            }
            let mut new_atoms = 0usize;
            for (ri, subst) in found {
                self.count_instance()?;
                if let Some(h) = &rules[ri].head {
                    if self.store.insert(h.substitute(&subst), round + 1) {
                        new_atoms += 1;
                    }
                }
                out.push(Instance { rule: ri, subst });
            }
            if new_atoms == 0 {
                break;
            }
            round += 1;
        }
        Ok(out)
    }

    /// Substitute each instance and ground the elements of its aggregates.
    fn ground_aggregates(&mut self, rules: &[Rule], instances: Vec<Instance>) -> Result<Vec<Rule>> {
        let mut out = Vec::with_capacity(instances.len());
        for inst in instances {
            let rule = &rules[inst.rule];
            let mut body = Vec::with_capacity(rule.body.len());
            for l in &rule.body {
                match l {
                    Literal::Cmp { .. } => {}
                    Literal::Agg(agg) => {
                        let agg = agg.substitute(&inst.subst);
                        body.push(Literal::Agg(self.ground_aggregate(&agg)?));
                    }
                    other => body.push(other.substitute(&inst.subst)),
                }
            }
            out.push(Rule {
                head: rule.head.as_ref().map(|h| h.substitute(&inst.subst)),
                body,
            });
        }
        Ok(out)
    }

    fn ground_aggregate(&mut self, agg: &Aggregate) -> Result<Aggregate> {
        let mut elements = Vec::new();
        for e in &agg.elements {
            let conj = Conjunction::compile(
                e.condition.iter().filter_map(|l| match l {
                    Literal::Pos(a) => Some(a),
                    _ => None,
                }),
                e.condition.iter().filter_map(|l| match l {
                    Literal::Cmp { lhs, op, rhs } => Some((lhs, *op, rhs)),
                    _ => None,
                }),
            );
            let ranges = vec![(0, u32::MAX); conj.atoms.len()];
            let mut found = Vec::new();
            Join::new(&self.store, &conj, ranges, self.opts.deadline).run(&mut |env| {
                found.push(conj.substitution(env));
                Ok(())
            })?;
            for s in found {
                self.count_instance()?;
                elements.push(AggregateElement {
                    terms: e.terms.iter().map(|t| t.substitute(&s)).collect(),
                    condition: e
                        .condition
                        .iter()
                        .filter(|l| !matches!(l, Literal::Cmp { .. }))
                        .map(|l| l.substitute(&s))
                        .collect(),
                });
            }
        }
        Ok(Aggregate {
            left: agg.left.clone(),
            elements,
            right: agg.right.clone(),
        })
    }
}

// ---------------------------------------------------------------------------
// phase 3: bounds and simplification

struct GElem {
    pos: Vec<u32>,
    neg: Vec<u32>,
}

struct GAgg {
    /// Elements grouped by tuple; a tuple counts once if any of its elements holds.
    groups: Vec<Vec<GElem>>,
    source: Aggregate,
}

struct GRule {
    head: Option<u32>,
    pos: Vec<u32>,
    neg: Vec<u32>,
    aggs: Vec<GAgg>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Truth {
    True,
    False,
    Unknown,
}

struct Bounds {
    certain: Vec<bool>,
    possible: Vec<bool>,
}

impl Bounds {
    fn elem_certain(&self, e: &GElem) -> bool {
        e.pos.iter().all(|&a| self.certain[a as usize]) && e.neg.iter().all(|&a| !self.possible[a as usize])
    }

    fn elem_possible(&self, e: &GElem) -> bool {
        e.pos.iter().all(|&a| self.possible[a as usize]) && e.neg.iter().all(|&a| !self.certain[a as usize])
    }

    fn aggregate(&self, agg: &GAgg) -> Truth {
        let mut lo = 0;
        let mut hi = 0;
        for g in &agg.groups {
            if g.iter().any(|e| self.elem_certain(e)) {
                lo += 1;
            }
            if g.iter().any(|e| self.elem_possible(e)) {
                hi += 1;
            }
        }
        let mut any_true = false;
        let mut any_false = false;
        for n in lo..=hi {
            if agg.source.guards_hold(n) {
                any_true = true;
            } else {
                any_false = true;
            }
            if any_true && any_false {
                return Truth::Unknown;
            }
        }
        if any_true {
            Truth::True
        } else {
            Truth::False
        }
    }
}

/// Least model of the rules enabled by `enabled`, seeded with `seed`.
fn least_model(rules: &[GRule], natoms: usize, seed: &[u32], enabled: &dyn Fn(&GRule) -> bool) -> Vec<bool> {
    let mut model = vec![false; natoms];
    let mut missing: Vec<usize> = Vec::with_capacity(rules.len());
    let mut watch: Vec<Vec<u32>> = vec![Vec::new(); natoms];
    let mut queue: Vec<u32> = Vec::new();
    for &a in seed {
        if !model[a as usize] {
            model[a as usize] = true;
            queue.push(a);
        }
    }
    for (ri, r) in rules.iter().enumerate() {
        if r.head.is_none() || !enabled(r) {
            missing.push(usize::MAX);
            continue;
        }
        missing.push(r.pos.len());
        for &a in &r.pos {
            watch[a as usize].push(ri as u32);
        }
        if r.pos.is_empty() {
            let h = r.head.unwrap();
            if !model[h as usize] {
                model[h as usize] = true;
                queue.push(h);
            }
        }
    }
    while let Some(a) = queue.pop() {
        for &ri in &watch[a as usize] {
            let m = &mut missing[ri as usize];
            *m -= 1;
            if *m == 0 {
                let h = rules[ri as usize].head.unwrap();
                if !model[h as usize] {
                    model[h as usize] = true;
                    queue.push(h);
                }
            }
        }
    }
    model
}

fn simplify(store: &Store, rules: Vec<Rule>, facts: &[Atom], keep_symmetric: bool) -> GroundProgram {
    // atoms outside the store (negated or aggregate atoms never derived) get ids too
    let mut ids: HashMap<Atom, u32> = store.ids.clone();
    let mut atoms: Vec<Atom> = store.atoms.clone();
    let derivable = store.atoms.len();
    let mut intern = |a: &Atom| -> u32 {
        if let Some(&id) = ids.get(a) {
            return id;
        }
        let id = atoms.len() as u32;
        atoms.push(a.clone());
        ids.insert(a.clone(), id);
        id
    };
    let grules: Vec<GRule> = rules
        .iter()
        .map(|r| {
            let mut g = GRule {
                head: r.head.as_ref().map(&mut intern),
                pos: Vec::new(),
                neg: Vec::new(),
                aggs: Vec::new(),
            };
            for l in &r.body {
                match l {
                    Literal::Pos(a) => g.pos.push(intern(a)),
                    Literal::Neg(a) => g.neg.push(intern(a)),
                    Literal::Agg(agg) => {
                        let mut by_tuple: HashMap<&[Term], usize> = HashMap::new();
                        let mut groups: Vec<Vec<GElem>> = Vec::new();
                        for e in &agg.elements {
                            let mut ge = GElem {
                                pos: Vec::new(),
                                neg: Vec::new(),
                            };
                            for c in &e.condition {
                                match c {
                                    Literal::Pos(a) => ge.pos.push(intern(a)),
                                    Literal::Neg(a) => ge.neg.push(intern(a)),
                                    _ => {}
                                }
                            }
                            let gi = *by_tuple.entry(&e.terms).or_insert_with(|| {
                                groups.push(Vec::new());
                                groups.len() - 1
                            });
                            groups[gi].push(ge);
                        }
                        g.aggs.push(GAgg {
                            groups,
                            source: agg.clone(),
                        });
                    }
                    Literal::Cmp { .. } => {}
                }
            }
            g
        })
        .collect();
    let natoms = atoms.len();
    let fact_ids: Vec<u32> = facts.iter().map(|f| ids[f]).collect();

    let mut bounds = Bounds {
        certain: vec![false; natoms],
        possible: (0..natoms).map(|i| i < derivable).collect(),
    };
    loop {
        let certain = least_model(&grules, natoms, &fact_ids, &|r| {
            r.neg.iter().all(|&a| !bounds.possible[a as usize])
                && r.aggs.iter().all(|g| bounds.aggregate(g) == Truth::True)
        });
        let next = Bounds {
            certain,
            possible: bounds.possible.clone(),
        };
        let possible = least_model(&grules, natoms, &fact_ids, &|r| {
            r.neg.iter().all(|&a| !next.certain[a as usize]) && r.aggs.iter().all(|g| next.aggregate(g) != Truth::False)
        });
        let changed = next.certain != bounds.certain || possible != bounds.possible;
        bounds = Bounds {
            certain: next.certain,
            possible,
        };
        if !changed {
            break;
        }
    }

    let mut out: BTreeSet<Rule> = BTreeSet::new();
    let mut seen_unsorted: Vec<Rule> = Vec::new();
    let mut seen_set: std::collections::HashSet<Rule> = std::collections::HashSet::new();
    'rules: for (r, g) in rules.iter().zip(&grules) {
        if g.head.is_some_and(|h| bounds.certain[h as usize]) {
            continue;
        }
        let mut body: Vec<Literal> = Vec::with_capacity(r.body.len());
        let mut agg_idx = 0;
        for l in &r.body {
            match l {
                Literal::Pos(a) => {
                    let id = ids[a] as usize;
                    if !bounds.possible[id] {
                        continue 'rules;
                    }
                    if !bounds.certain[id] {
                        body.push(l.clone());
                    }
                }
                Literal::Neg(a) => {
                    let id = ids[a] as usize;
                    if bounds.certain[id] {
                        continue 'rules;
                    }
                    if bounds.possible[id] {
                        body.push(l.clone());
                    }
                }
                Literal::Agg(agg) => {
                    let gagg = &g.aggs[agg_idx];
                    agg_idx += 1;
                    match bounds.aggregate(gagg) {
                        Truth::False => continue 'rules,
                        Truth::True => {}
                        Truth::Unknown => body.push(Literal::Agg(reduce_aggregate(agg, &ids, &bounds, keep_symmetric))),
                    }
                }
                Literal::Cmp { .. } => {}
            }
        }
        if !keep_symmetric {
            body.sort();
            body.dedup();
        }
        let rule = Rule {
            head: r.head.clone(),
            body,
        };
        if keep_symmetric {
            if seen_set.insert(rule.clone()) {
                seen_unsorted.push(rule);
            }
        } else {
            out.insert(rule);
        }
    }
    let rules = if keep_symmetric {
        seen_unsorted.sort();
        seen_unsorted
    } else {
        out.into_iter().collect()
    };
    let facts = (0..natoms)
        .filter(|&i| bounds.certain[i])
        .map(|i| atoms[i].clone())
        .collect();
    GroundProgram { rules, facts }
}

/// Drop impossible elements and strip literals whose value is already known.
fn reduce_aggregate(agg: &Aggregate, ids: &HashMap<Atom, u32>, b: &Bounds, keep_order: bool) -> Aggregate {
    let mut elements = Vec::with_capacity(agg.elements.len());
    'elems: for e in &agg.elements {
        let mut condition = Vec::with_capacity(e.condition.len());
        for c in &e.condition {
            match c {
                Literal::Pos(a) => {
                    let id = ids[a] as usize;
                    if !b.possible[id] {
                        continue 'elems;
                    }
                    if !b.certain[id] {
                        condition.push(c.clone());
                    }
                }
                Literal::Neg(a) => {
                    let id = ids[a] as usize;
                    if b.certain[id] {
                        continue 'elems;
                    }
                    if b.possible[id] {
                        condition.push(c.clone());
                    }
                }
                _ => condition.push(c.clone()),
            }
        }
        elements.push(AggregateElement {
            terms: e.terms.clone(),
            condition,
        });
    }
    if !keep_order {
        elements.sort();
        elements.dedup();
    }
    Aggregate {
        left: agg.left.clone(),
        elements,
        right: agg.right.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_atom, parse_program};

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    fn module_frame() -> Program {
        parse_program(include_str!("../../fixtures/module_frame.lp")).unwrap()
    }

    #[test]
    fn facts_only() {
        let p = parse_program("a(1). b(x).").unwrap();
        let g = ground(&p).unwrap();
        assert!(g.rules.is_empty());
        assert_eq!(g.facts, p.facts.iter().cloned().collect());
    }

    #[test]
    fn builtin_filtering_and_fact_folding() {
        let p = parse_program("b(1). b(2). b(3). a(X) :- b(X), X < 2.").unwrap();
        let g = ground(&p).unwrap();
        assert!(g.rules.is_empty());
        assert!(g.facts.contains(&atom("a(1)")));
        assert!(!g.facts.contains(&atom("a(2)")));
    }

    #[test]
    fn recursion_reaches_fixpoint() {
        let p = parse_program("e(1,2). e(2,3). e(3,4). t(X,Y) :- e(X,Y). t(X,Z) :- t(X,Y), e(Y,Z).").unwrap();
        let g = ground(&p).unwrap();
        assert!(g.rules.is_empty());
        assert_eq!(g.facts.iter().filter(|a| &*a.predicate == "t").count(), 6);
    }

    #[test]
    fn module_frame_plain_grounding() {
        let g = ground(&module_frame()).unwrap();
        let expected = parse_program(
            "mINf(1,1) :- not mINf_n(1,1).
             mINf(2,1) :- not mINf_n(2,1).
             mINf(2,2) :- not mINf_n(2,2).
             mINf_n(1,1) :- not mINf(1,1).
             mINf_n(2,1) :- not mINf(2,1).
             mINf_n(2,2) :- not mINf(2,2).
             modulePlaced(2) :- mINf(2,1).
             modulePlaced(2) :- mINf(2,2).
             :- not modulePlaced(2).
             :- mINf(1,1).
             :- mINf(2,1), mINf(2,2).
             :- mINf(1,1), mINf(2,1).
             :- mINf(2,2).",
        )
        .unwrap();
        let got: BTreeSet<Rule> = g.rules.iter().cloned().collect();
        let want: BTreeSet<Rule> = expected.rules.into_iter().collect();
        assert_eq!(got, want);
        assert!(g.facts.contains(&atom("modulePlaced(1)")));
        assert!(g.facts.contains(&atom("mINf(1,2)")));
    }

    #[test]
    fn keep_symmetric_restores_orientations() {
        let opts = GroundOptions {
            keep_symmetric: true,
            ..GroundOptions::default()
        };
        let merged = ground(&module_frame()).unwrap();
        let kept = ground_with(&module_frame(), &opts).unwrap();
        assert_eq!(kept.rules.len(), merged.rules.len() + 2);
    }

    #[test]
    fn determinism() {
        let a = ground(&module_frame()).unwrap();
        let b = ground(&module_frame()).unwrap();
        assert_eq!(a.render(), b.render());
    }

    #[test]
    fn aggregate_filters_fold_away() {
        let src = format!(
            "{}\nmINf(X,Y) :- not mINf_n(X,Y), module(X), frame(Y), \
             #count {{ 1 : module(X), module(M2), frame(Y), mINf(M2,Y), X <> M2 }} < 1, \
             #count {{ 1 : module(X), frame(Y), frame(F2), mINf(X,F2), Y <> F2 }} < 1.",
            include_str!("../../fixtures/module_frame.lp")
                .replace("mINf(X,Y) :- not mINf_n(X,Y), \n    module(X), frame(Y).", "")
        );
        let g = ground(&parse_program(&src).unwrap()).unwrap();
        assert!(g.facts.contains(&atom("mINf_n(1,1)")));
        assert!(g.facts.contains(&atom("mINf_n(2,2)")));
        let expected = parse_program(
            "mINf(2,1) :- not mINf_n(2,1).
             mINf_n(2,1) :- not mINf(2,1).
             modulePlaced(2) :- mINf(2,1).
             :- not modulePlaced(2).",
        )
        .unwrap();
        let got: BTreeSet<Rule> = g.rules.iter().cloned().collect();
        assert_eq!(got, expected.rules.into_iter().collect());
    }

    #[test]
    fn unsafe_rule_rejected() {
        let p = parse_program("a(X) :- not b(X).").unwrap();
        assert!(matches!(ground(&p), Err(Error::Unsafe { .. })));
    }

    #[test]
    fn instance_cap() {
        let p = parse_program("d(1). d(2). d(3). p(X,Y) :- d(X), d(Y).").unwrap();
        let opts = GroundOptions {
            instance_cap: 5,
            ..GroundOptions::default()
        };
        assert!(matches!(
            ground_with(&p, &opts),
            Err(Error::UniverseTooLarge { limit: 5 })
        ));
    }

    #[test]
    fn violated_constraint_stays() {
        let p = parse_program("a. :- a.").unwrap();
        let g = ground(&p).unwrap();
        assert_eq!(g.rules, vec![Rule::new(None, vec![])]);
    }
}
