//! Hand-written lexer and recursive-descent parser for the rule fragment.
//!
//! Grammar (informally):
//!
//! ```text
//! program   ::= statement*
//! statement ::= atom "." | atom ":-" body "." | ":-" body? "."
//! body      ::= literal ("," literal)*
//! literal   ::= "not" atom | atom | term cmp term | [term cmp] "#count" "{" elems "}" [cmp term]
//! elems     ::= (elem (";" elem)*)?
//! elem      ::= term ("," term)* [":" literal ("," literal)*]
//! ```

use std::sync::Arc;

use super::{Aggregate, AggregateElement, Atom, CmpOp, LeftGuard, Literal, Program, RightGuard, Rule, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Semi,
    If,
    Cmp(CmpOp),
    Directive(String),
    Bar,
    Anon,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Directive(d) => format!("`#{d}`"),
            Tok::Cmp(op) => format!("`{op}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Spanned {
                tok: if word.starts_with('_') {
                    Tok::Anon
                } else if c.is_ascii_uppercase() {
                    Tok::Var(word)
                } else {
                    Tok::Ident(word)
                },
                line: l0,
                column: c0,
            });
            continue;
        } else if c.is_ascii_digit() || (c == '-' && peek.is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            bump!();
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let digits: String = chars[start..i].iter().collect();
            let v = digits.parse::<i64>().map_err(|_| Error::Syntax {
                line: l0,
                column: c0,
                expected: "integer within 64-bit range".into(),
            })?;
            out.push(Spanned {
                tok: Tok::Int(v),
                line: l0,
                column: c0,
            });
            continue;
        } else if c == '#' {
            bump!();
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Spanned {
                tok: Tok::Directive(word),
                line: l0,
                column: c0,
            });
            continue;
        } else {
            let (tok, width) = match (c, peek) {
                (':', Some('-')) => (Tok::If, 2),
                ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
                ('<', Some('>')) => (Tok::Cmp(CmpOp::Ne), 2),
                ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
                ('!', Some('=')) => (Tok::Cmp(CmpOp::Ne), 2),
                ('=', Some('=')) => (Tok::Cmp(CmpOp::Eq), 2),
                ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
                ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
                ('=', _) => (Tok::Cmp(CmpOp::Eq), 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                (':', _) => (Tok::Colon, 1),
                (';', _) => (Tok::Semi, 1),
                ('|', _) => (Tok::Bar, 1),
                _ => {
                    return Err(Error::Syntax {
                        line: l0,
                        column: c0,
                        expected: format!("a token, found `{c}`"),
                    })
                }
            };
            for _ in 0..width {
                bump!();
            }
            tok
        };
        out.push(Spanned {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> Result<T> {
        let s = &self.toks[self.pos];
        Err(Error::Syntax {
            line: s.line,
            column: s.column,
            expected: format!("{expected}, found {}", s.tok.describe()),
        })
    }

    fn unsupported<T>(&self, name: &str) -> Result<T> {
        let s = &self.toks[self.pos];
        Err(Error::Unsupported {
            name: name.to_string(),
            line: s.line,
            column: s.column,
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.err(what)
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut program = Program::default();
        while *self.peek() != Tok::Eof {
            self.statement(&mut program)?;
        }
        Ok(program)
    }

    fn statement(&mut self, program: &mut Program) -> Result<()> {
        match self.peek() {
            Tok::If => {
                self.next();
                let body = if *self.peek() == Tok::Dot {
                    Vec::new()
                } else {
                    self.body(true)?
                };
                self.expect(Tok::Dot, "`.`")?;
                program.rules.push(Rule::new(None, body));
            }
            Tok::LBrace => return self.unsupported("choice rule"),
            Tok::Directive(d) => {
                let d = d.clone();
                return self.unsupported(&format!("#{d} directive"));
            }
            _ => {
                let head = self.atom()?;
                match self.peek() {
                    Tok::Bar | Tok::Semi => return self.unsupported("disjunctive head"),
                    Tok::Dot => {
                        self.next();
                        if head.is_ground() {
                            program.facts.push(head);
                        } else {
                            program.rules.push(Rule::new(Some(head), Vec::new()));
                        }
                    }
                    Tok::If => {
                        self.next();
                        let body = self.body(true)?;
                        self.expect(Tok::Dot, "`.`")?;
                        program.rules.push(Rule::new(Some(head), body));
                    }
                    _ => return self.err("`.` or `:-`"),
                }
            }
        }
        Ok(())
    }

    fn body(&mut self, allow_aggregates: bool) -> Result<Vec<Literal>> {
        let mut lits = vec![self.literal(allow_aggregates)?];
        while *self.peek() == Tok::Comma {
            self.next();
            lits.push(self.literal(allow_aggregates)?);
        }
        Ok(lits)
    }

    fn literal(&mut self, allow_aggregates: bool) -> Result<Literal> {
        if let Tok::Ident(w) = self.peek() {
            if w == "not" && !matches!(self.peek_at(1), Tok::LParen | Tok::Cmp(_)) {
                self.next();
                if let Tok::Ident(w2) = self.peek() {
                    if w2 == "not" {
                        return self.unsupported("double negation");
                    }
                }
                return Ok(Literal::Neg(self.atom()?));
            }
        }
        if let Tok::Directive(_) = self.peek() {
            return self.aggregate(None, allow_aggregates);
        }
        let is_atom = match self.peek() {
            Tok::Ident(_) => !matches!(self.peek_at(1), Tok::Cmp(_)),
            _ => false,
        };
        if is_atom {
            return Ok(Literal::Pos(self.atom()?));
        }
        let lhs = self.term()?;
        let op = match self.next() {
            Tok::Cmp(op) => op,
            _ => {
                self.pos -= 1;
                return self.err("comparison operator");
            }
        };
        if let Tok::Directive(_) = self.peek() {
            return self.aggregate(Some(LeftGuard { term: lhs, op }), allow_aggregates);
        }
        let rhs = self.term()?;
        Ok(Literal::cmp(lhs, op, rhs))
    }

    fn aggregate(&mut self, left: Option<LeftGuard>, allowed: bool) -> Result<Literal> {
        match self.peek() {
            Tok::Directive(d) if d == "count" => {}
            Tok::Directive(d) => {
                let d = d.clone();
                return self.unsupported(&format!("#{d} aggregate"));
            }
            _ => return self.err("`#count`"),
        }
        if !allowed {
            return self.unsupported("nested aggregate");
        }
        self.next();
        self.expect(Tok::LBrace, "`{`")?;
        let mut elements = Vec::new();
        if *self.peek() != Tok::RBrace {
            elements.push(self.element()?);
            while *self.peek() == Tok::Semi {
                self.next();
                elements.push(self.element()?);
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        let right = if let Tok::Cmp(op) = *self.peek() {
            self.next();
            Some(RightGuard { op, term: self.term()? })
        } else {
            None
        };
        if left.is_none() && right.is_none() {
            return self.err("an aggregate guard");
        }
        Ok(Literal::Agg(Aggregate { left, elements, right }))
    }

    fn element(&mut self) -> Result<AggregateElement> {
        let mut terms = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.next();
            terms.push(self.term()?);
        }
        let condition = if *self.peek() == Tok::Colon {
            self.next();
            self.body(false)?
        } else {
            Vec::new()
        };
        Ok(AggregateElement { terms, condition })
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = match self.peek() {
            Tok::Ident(w) => w.clone(),
            Tok::LBrace => return self.unsupported("choice rule"),
            _ => return self.err("an atom"),
        };
        self.next();
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.next();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`)` or `,`")?;
        }
        Ok(Atom {
            predicate: Arc::from(name.as_str()),
            args,
        })
    }

    fn term(&mut self) -> Result<Term> {
        let t = match self.peek() {
            Tok::Int(v) => Term::Int(*v),
            Tok::Var(v) => Term::Var(Arc::from(v.as_str())),
            Tok::Ident(w) => {
                if *self.peek_at(1) == Tok::LParen {
                    return self.unsupported("function term");
                }
                Term::Sym(Arc::from(w.as_str()))
            }
            Tok::Anon => return self.unsupported("anonymous variable"),
            _ => return self.err("a term"),
        };
        self.next();
        Ok(t)
    }
}

/// Parse program text in the supported fragment.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    p.program()
}

/// Parse a single atom such as `mINf(1,2)`.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let a = p.atom()?;
    if *p.peek() != Tok::Eof {
        return p.err("end of atom");
    }
    Ok(a)
}

/// Parse a whitespace-separated list of atoms (the model-line format).
/// Trailing dots after an atom are accepted so fact files parse as well.
pub fn parse_atoms(text: &str) -> Result<Vec<Atom>> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut out = Vec::new();
    while *p.peek() != Tok::Eof {
        out.push(p.atom()?);
        if *p.peek() == Tok::Dot {
            p.next();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_fact() {
        let p = parse_program("person(1).").unwrap();
        assert!(p.rules.is_empty());
        assert_eq!(p.facts, vec![Atom::new("person", vec![Term::Int(1)])]);
    }

    #[test]
    fn guess_rule() {
        let p = parse_program("cabinet(C) :- cabinetDomain(C), not cabinet_n(C).").unwrap();
        let r = &p.rules[0];
        assert_eq!(r.head, Some(Atom::new("cabinet", vec![Term::var("C")])));
        assert_eq!(
            r.body,
            vec![
                Literal::Pos(Atom::new("cabinetDomain", vec![Term::var("C")])),
                Literal::Neg(Atom::new("cabinet_n", vec![Term::var("C")])),
            ]
        );
    }

    #[test]
    fn left_guard_aggregate_constraint() {
        let p = parse_program(":- 6 <= #count { T : cabinetTOthing(C,T), thing(T) }, cabinet(C).").unwrap();
        let r = &p.rules[0];
        assert!(r.is_constraint());
        assert_eq!(r.body.len(), 2);
        let Literal::Agg(agg) = &r.body[0] else {
            panic!("expected aggregate")
        };
        let guard = agg.left.as_ref().unwrap();
        assert_eq!((guard.term.clone(), guard.op), (Term::Int(6), CmpOp::Le));
        assert!(agg.right.is_none());
        assert_eq!(agg.elements.len(), 1);
        assert_eq!(agg.elements[0].condition.len(), 2);
        assert!(matches!(r.body[1], Literal::Pos(_)));
    }

    #[test]
    fn right_guard_and_builtins() {
        let p = parse_program(
            "mINf(X,Y) :- not mINf_n(X,Y), module(X), frame(Y), \
             #count{1: module(X), module(M2), frame(Y), mINf(M2,Y), X <> M2 } < 1.",
        )
        .unwrap();
        let Literal::Agg(agg) = &p.rules[0].body[3] else {
            panic!()
        };
        assert_eq!(agg.right.as_ref().unwrap().op, CmpOp::Lt);
        assert_eq!(
            agg.elements[0].condition[4],
            Literal::cmp(Term::var("X"), CmpOp::Ne, Term::var("M2"))
        );
    }

    #[test]
    fn comments_and_empty_aggregate() {
        let p = parse_program("% comment\na :- #count { } < 1. % trailing\n").unwrap();
        assert_eq!(p.rules.len(), 1);
    }

    #[test]
    fn unsupported_constructs() {
        for src in [
            "a | b.",
            "a ; b.",
            "{ a }.",
            "a :- #sum { 1 : b } < 2.",
            "a(X) :- b(X, _).",
            "a(f(1)).",
            "#const n = 3.",
        ] {
            match parse_program(src) {
                Err(Error::Unsupported { .. }) => {}
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_error_position() {
        match parse_program("a(1).\nb(2) c.") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 6)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_program("a(1"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn model_line() {
        let atoms = parse_atoms("a b(1) c(x,2)").unwrap();
        assert_eq!(atoms.len(), 3);
        assert_eq!(atoms[1], Atom::new("b", vec![Term::Int(1)]));
        assert!(parse_atoms("a b(").is_err());
    }
}
