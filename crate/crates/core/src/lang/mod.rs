//! Abstract syntax for the normal-rule ASP fragment with `#count` aggregates.
//!
//! Terms, atoms and rules are plain values: cheap to clone (names are
//! reference counted) and `Send + Sync`, so programs can be shared across
//! threads without copying.

mod parser;
mod render;
mod safety;
mod unify;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use parser::{parse_atom, parse_atoms, parse_program};
pub use render::render_program;
pub use safety::{check_safety, SafetyViolation, VariablePosition};
pub use unify::{apply_substitution, unify, Substitutable, Substitution};

/// Interned-ish name used for predicates, constants and variables.
pub type Name = Arc<str>;

/// A term of the fragment: no function symbols, no arithmetic.
///
/// The derived order puts every integer before every constant symbol, and
/// symbols compare lexicographically. Builtin comparisons use this order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(i64),
    Sym(Name),
    Var(Name),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn sym(name: &str) -> Term {
        Term::Sym(Arc::from(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        !self.is_var()
    }
}

impl From<i64> for Term {
    fn from(v: i64) -> Self {
        Term::Int(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Name,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Atom {
        Atom {
            predicate: Arc::from(predicate),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// `(name, arity)` key identifying the relation this atom belongs to.
    pub fn signature(&self) -> (Name, usize) {
        (self.predicate.clone(), self.args.len())
    }

    pub fn variables(&self, out: &mut BTreeSet<Name>) {
        for t in &self.args {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        }
    }
}

/// Builtin comparison operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn eval<T: Ord + ?Sized>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }

    /// The complementary operator: `a op b` holds iff `a op.negate() b` fails.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    /// The operator with its operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            op => op,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `term op count` on the left of the aggregate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeftGuard {
    pub term: Term,
    pub op: CmpOp,
}

/// `count op term` on the right of the aggregate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RightGuard {
    pub op: CmpOp,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AggregateElement {
    pub terms: Vec<Term>,
    pub condition: Vec<Literal>,
}

/// A `#count` aggregate. At least one guard is present.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Aggregate {
    pub left: Option<LeftGuard>,
    pub elements: Vec<AggregateElement>,
    pub right: Option<RightGuard>,
}

impl Aggregate {
    /// Guards as `(op, bound)` pairs constraining the count, i.e. each pair
    /// reads `count op bound`.
    pub fn count_bounds(&self) -> Vec<(CmpOp, &Term)> {
        let mut out = Vec::with_capacity(2);
        if let Some(g) = &self.left {
            out.push((g.op.flip(), &g.term));
        }
        if let Some(g) = &self.right {
            out.push((g.op, &g.term));
        }
        out
    }

    /// Whether `count` satisfies every guard. Guard terms must be ground.
    pub fn guards_hold(&self, count: usize) -> bool {
        let count = Term::Int(count as i64);
        self.count_bounds()
            .into_iter()
            .all(|(op, bound)| op.eval(&count, bound))
    }

    /// The same aggregate with its guards moved to the left-hand form
    /// (`bound op #count{...}`). A two-sided aggregate keeps its right guard.
    pub fn normalized(&self) -> Aggregate {
        match (&self.left, &self.right) {
            (None, Some(g)) => Aggregate {
                left: Some(LeftGuard {
                    term: g.term.clone(),
                    op: g.op.flip(),
                }),
                elements: self.elements.clone(),
                right: None,
            },
            _ => self.clone(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.left.iter().all(|g| g.term.is_ground())
            && self.right.iter().all(|g| g.term.is_ground())
            && self
                .elements
                .iter()
                .all(|e| e.terms.iter().all(Term::is_ground) && e.condition.iter().all(Literal::is_ground))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
    Cmp { lhs: Term, op: CmpOp, rhs: Term },
    Agg(Aggregate),
}

impl Literal {
    pub fn cmp(lhs: Term, op: CmpOp, rhs: Term) -> Literal {
        Literal::Cmp { lhs, op, rhs }
    }

    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_aggregate(&self) -> bool {
        matches!(self, Literal::Agg(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a.is_ground(),
            Literal::Cmp { lhs, rhs, .. } => lhs.is_ground() && rhs.is_ground(),
            Literal::Agg(agg) => agg.is_ground(),
        }
    }

    /// Every variable occurring in the literal, including aggregate-local ones.
    pub fn variables(&self, out: &mut BTreeSet<Name>) {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a.variables(out),
            Literal::Cmp { lhs, rhs, .. } => {
                for t in [lhs, rhs] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Literal::Agg(agg) => {
                for g in agg
                    .left
                    .iter()
                    .map(|g| &g.term)
                    .chain(agg.right.iter().map(|g| &g.term))
                {
                    if let Term::Var(v) = g {
                        out.insert(v.clone());
                    }
                }
                for e in &agg.elements {
                    for t in &e.terms {
                        if let Term::Var(v) = t {
                            out.insert(v.clone());
                        }
                    }
                    for l in &e.condition {
                        l.variables(out);
                    }
                }
            }
        }
    }
}

/// A normal rule; a missing head makes it a constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Option<Atom>,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Option<Atom>, body: Vec<Literal>) -> Rule {
        Rule { head, body }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn positive_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|l| match l {
            Literal::Pos(a) => Some(a),
            _ => None,
        })
    }

    pub fn negative_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|l| match l {
            Literal::Neg(a) => Some(a),
            _ => None,
        })
    }

    pub fn has_negation(&self) -> bool {
        self.negative_body().next().is_some()
    }

    pub fn variables(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        if let Some(h) = &self.head {
            h.variables(&mut out);
        }
        for l in &self.body {
            l.variables(&mut out);
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.head.iter().all(Atom::is_ground) && self.body.iter().all(Literal::is_ground)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub facts: Vec<Atom>,
}

impl Program {
    pub fn new(rules: Vec<Rule>, facts: Vec<Atom>) -> Program {
        Program { rules, facts }
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.is_constraint())
    }

    /// The program extended with extra facts, appended in order.
    pub fn with_facts<I: IntoIterator<Item = Atom>>(&self, facts: I) -> Program {
        let mut p = self.clone();
        p.facts.extend(facts);
        p
    }
}
