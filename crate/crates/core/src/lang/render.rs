use std::fmt::{self, Display, Formatter, Write};

use super::{Aggregate, AggregateElement, Atom, Literal, Program, Rule, Term};

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) => write!(f, "{v}"),
            Term::Sym(s) | Term::Var(s) => f.write_str(s),
        }
    }
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_char('(')?;
            write_sep(f, &self.args, ",")?;
            f.write_char(')')?;
        }
        Ok(())
    }
}

impl Display for AggregateElement {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_sep(f, &self.terms, ",")?;
        if !self.condition.is_empty() {
            f.write_str(" : ")?;
            write_sep(f, &self.condition, ", ")?;
        }
        Ok(())
    }
}

impl Display for Aggregate {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(g) = &self.left {
            write!(f, "{} {} ", g.term, g.op)?;
        }
        f.write_str("#count {")?;
        if !self.elements.is_empty() {
            f.write_char(' ')?;
            write_sep(f, &self.elements, "; ")?;
        }
        f.write_str(" }")?;
        if let Some(g) = &self.right {
            write!(f, " {} {}", g.op, g.term)?;
        }
        Ok(())
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => a.fmt(f),
            Literal::Neg(a) => write!(f, "not {a}"),
            Literal::Cmp { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs}"),
            Literal::Agg(agg) => agg.fmt(f),
        }
    }
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match (&self.head, self.body.is_empty()) {
            (Some(h), true) => write!(f, "{h}."),
            (Some(h), false) => {
                write!(f, "{h} :- ")?;
                write_sep(f, &self.body, ", ")?;
                f.write_char('.')
            }
            (None, true) => f.write_str(":- ."),
            (None, false) => {
                f.write_str(":- ")?;
                write_sep(f, &self.body, ", ")?;
                f.write_char('.')
            }
        }
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for a in &self.facts {
            writeln!(f, "{a}.")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Canonical text: facts first, then rules, one statement per line.
pub fn render_program(p: &Program) -> String {
    p.to_string()
}

fn write_sep<T: Display>(f: &mut Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        item.fmt(f)?;
    }
    Ok(())
}
