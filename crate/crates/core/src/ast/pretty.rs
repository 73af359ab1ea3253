use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::{Clause, Goal, GoalSeq, Program, Term, TypeDecl, TypeExpr, CONS, NIL};

fn is_plain_atom(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_lowercase() => chars.all(|c| c.is_alphanumeric() || c == '_'),
        _ => false,
    }
}

fn is_number(s: &str) -> bool {
    let mut parts = s.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac_ok = parts
        .next()
        .is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()));
    !int.is_empty() && int.bytes().all(|b| b.is_ascii_digit()) && frac_ok
}

/// Renders an atom so that it lexes back to the same symbol.
pub fn quote_atom(s: &str) -> String {
    if is_plain_atom(s) || is_number(s) || s == NIL {
        return s.into();
    }
    let mut out = String::from("'");
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

fn functor_name(s: &str) -> String {
    if s == NIL {
        String::from("'[]'")
    } else {
        quote_atom(s)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) if c == CONS => f.write_str("'[|]'"),
            Term::Const(c) => f.write_str(&quote_atom(c)),
            Term::Compound(g, args) if g == CONS && args.len() == 2 => {
                f.write_char('[')?;
                write!(f, "{}", args[0])?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::Compound(g, a) if g == CONS && a.len() == 2 => {
                            write!(f, ", {}", a[0])?;
                            tail = &a[1];
                        }
                        Term::Const(c) if c == NIL => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                f.write_char(']')
            }
            Term::Compound(g, args) => {
                write!(f, "{}(", functor_name(g))?;
                write_joined(f, args, ", ")?;
                f.write_char(')')
            }
        }
    }
}

fn write_joined<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    items: &[T],
    sep: &str,
) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Unify(l, r) => write!(f, "{l} = {r}"),
            Goal::Call(p, args) if args.is_empty() => f.write_str(&functor_name(p)),
            Goal::Call(p, args) => {
                write!(f, "{}(", functor_name(p))?;
                write_joined(f, args, ", ")?;
                f.write_char(')')
            }
        }
    }
}

fn seq_text(seq: &GoalSeq) -> String {
    if seq.is_empty() {
        return "true".into();
    }
    seq.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&functor_name(&self.name))?;
        if !self.head.is_empty() {
            f.write_char('(')?;
            write_joined(f, &self.head, ", ")?;
            f.write_char(')')?;
        }
        match self.body.as_slice() {
            [] => f.write_char('.'),
            [only] if only.is_empty() => f.write_char('.'),
            [only] => write!(f, " :- {}.", seq_text(only)),
            [first, rest @ ..] => {
                write!(f, " :-\n    ( {} )", seq_text(first))?;
                for seq in rest {
                    write!(f, "\n  ; ( {} )", seq_text(seq))?;
                }
                f.write_char('.')
            }
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Var(v) => f.write_str(v),
            TypeExpr::Sym(s, args) if s == CONS && args.len() == 2 => {
                write!(f, "[{}|{}]", Atomic(&args[0]), args[1])
            }
            TypeExpr::Sym(s, args) if args.is_empty() => f.write_str(&quote_atom(s)),
            TypeExpr::Sym(s, args) => {
                write!(f, "{}(", functor_name(s))?;
                write_joined(f, args, ", ")?;
                f.write_char(')')
            }
            TypeExpr::Sum(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}", Atomic(item))?;
                }
                Ok(())
            }
            TypeExpr::Mu(b, body) => write!(f, "mu {b}. {}", Atomic(body)),
        }
    }
}

/// Parenthesizes sums and mu-types where a single type atom is expected.
struct Atomic<'a>(&'a TypeExpr);

impl fmt::Display for Atomic<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            TypeExpr::Sum(_) | TypeExpr::Mu(..) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for TypeDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, ":- type {}", quote_atom(&self.name))?;
        if !self.params.is_empty() {
            write!(f, "({})", self.params.join(", "))?;
        }
        f.write_str(" = ")?;
        for (i, s) in self.summands.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}", Atomic(s))?;
        }
        f.write_char('.')
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.type_decls {
            writeln!(f, "{d}")?;
        }
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Source text that parses back to a structurally equal program.
pub fn pretty(p: &Program) -> String {
    format!("{p}")
}

#[cfg(test)]
mod tests {
    use super::super::parse_program;
    use super::*;

    #[test]
    fn empty_program_prints_nothing() {
        assert_eq!(pretty(&Program::new()), "");
    }

    #[test]
    fn lists_use_sugar() {
        let p = parse_program("p([1, 2|T], [], [a]).").unwrap();
        assert_eq!(pretty(&p), "p([1, 2|T], [], [a]).\n");
    }

    #[test]
    fn quoting_round_trips() {
        for src in [
            "p('Hello', 'it''s').",
            "p('[|]', '[]'(x), f('a b')).",
            "'Odd'(1.25).",
        ] {
            let src = src.replace("''", "\\'");
            let p = parse_program(&src).unwrap();
            assert_eq!(parse_program(&pretty(&p)).unwrap(), p, "{}", pretty(&p));
        }
    }

    #[test]
    fn normal_form_layout() {
        let src = "add(X1,X2,X3) :- ( X1 = 0, X2 = X, X3 = X ) ; ( X1 = s(Y), add(Y, X2, X3) ).";
        let p = parse_program(src).unwrap();
        let text = pretty(&p);
        assert_eq!(
            text,
            "add(X1, X2, X3) :-\n    ( X1 = 0, X2 = X, X3 = X )\n  ; ( X1 = s(Y), add(Y, X2, X3) ).\n"
        );
        assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn type_declarations_round_trip() {
        let src = ":- type dummy(A) = 1 + [] + [A|dummy(A)].\n:- type t = f(int + atom, mu b. (z + s(b))).\n";
        let p = parse_program(src).unwrap();
        assert_eq!(pretty(&p), src);
    }
}
