use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::{Clause, Goal, GoalSeq, Program, Span, Term, TypeDecl, TypeExpr, CONS, NIL};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{span}: {message}")]
    Syntax { span: Span, message: String },
    #[error("{span}: type `{name}` is declared more than once")]
    DuplicateTypeDecl { span: Span, name: String },
}

impl ParseError {
    fn at(span: Span, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            span,
            message: message.into(),
        }
    }

    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. } | ParseError::DuplicateTypeDecl { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(String),
    Atom(String),
    /// Integer or float literal.
    Num(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bar,
    Comma,
    Semi,
    Dot,
    Neck,
    Eq,
    Plus,
    Star,
    Arrow,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Atom(a) => format!("atom `{a}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::End => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Bar => "|",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Neck => ":-",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::Arrow => "->",
            _ => "?",
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column: col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            let word: String = chars[start..i].iter().collect();
            let tok = if c.is_uppercase() || c == '_' {
                Tok::Var(word)
            } else {
                Tok::Atom(word)
            };
            out.push((tok, span));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col, '.');
                while i < chars.len() && chars[i].is_ascii_digit() {
                    {
                        let ch = chars[i];
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), span));
            continue;
        }
        if c == '\'' {
            advance(&mut i, &mut line, &mut col, c);
            let mut name = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(ParseError::at(span, "unterminated quoted atom")),
                    Some('\'') => {
                        advance(&mut i, &mut line, &mut col, '\'');
                        break;
                    }
                    Some('\\') => {
                        advance(&mut i, &mut line, &mut col, '\\');
                        match chars.get(i) {
                            Some(&e) => {
                                name.push(e);
                                advance(&mut i, &mut line, &mut col, e);
                            }
                            None => return Err(ParseError::at(span, "unterminated quoted atom")),
                        }
                    }
                    Some(&ch) => {
                        name.push(ch);
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            out.push((Tok::Atom(name), span));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            (':', Some('-')) => (Tok::Neck, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('|', _) => (Tok::Bar, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('.', _) => (Tok::Dot, 1),
            ('=', _) => (Tok::Eq, 1),
            ('+', _) => (Tok::Plus, 1),
            ('*', _) => (Tok::Star, 1),
            _ => return Err(ParseError::at(span, format!("unexpected character `{c}`"))),
        };
        for _ in 0..width {
            {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
        }
        out.push((tok, span));
    }
    out.push((Tok::End, Span { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            anon: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", t.symbol())))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::at(
            self.span(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut program = Program::new();
        let mut declared = BTreeSet::new();
        while *self.peek() != Tok::End {
            if *self.peek() == Tok::Neck {
                let span = self.span();
                let decl = self.type_decl()?;
                if !declared.insert(decl.name.clone()) {
                    return Err(ParseError::DuplicateTypeDecl {
                        span,
                        name: decl.name,
                    });
                }
                program.type_decls.push(decl);
            } else {
                program.clauses.push(self.clause()?);
            }
        }
        Ok(program)
    }

    fn type_decl(&mut self) -> Result<TypeDecl, ParseError> {
        let span = self.span();
        self.expect(Tok::Neck)?;
        match self.bump() {
            Tok::Atom(a) if a == "type" => {}
            _ => {
                return Err(ParseError::at(
                    span,
                    "only `:- type` directives are supported",
                ))
            }
        }
        let name = match self.bump() {
            Tok::Atom(a) => a,
            _ => return Err(ParseError::at(span, "expected a type name after `:- type`")),
        };
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                match self.bump() {
                    Tok::Var(v) => params.push(v),
                    Tok::Atom(a) if super::is_greek(&a) => params.push(a),
                    _ => return Err(ParseError::at(span, "type parameters must be variables")),
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::Eq)?;
        let mut summands = vec![self.type_atom()?];
        while self.eat(&Tok::Plus) {
            summands.push(self.type_atom()?);
        }
        self.expect(Tok::Dot)?;
        Ok(TypeDecl {
            name,
            params,
            summands,
            span,
        })
    }

    fn type_expr(&mut self) -> Result<TypeExpr, ParseError> {
        let first = self.type_atom()?;
        if *self.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(&Tok::Plus) {
            items.push(self.type_atom()?);
        }
        Ok(TypeExpr::Sum(items))
    }

    fn type_atom(&mut self) -> Result<TypeExpr, ParseError> {
        let span = self.span();
        match self.bump() {
            Tok::Atom(a) if a == "mu" && matches!(self.peek(), Tok::Atom(_) | Tok::Var(_)) => {
                let binder = match self.bump() {
                    Tok::Atom(b) | Tok::Var(b) => b,
                    _ => unreachable!(),
                };
                self.expect(Tok::Dot)?;
                Ok(TypeExpr::Mu(
                    binder,
                    alloc::boxed::Box::new(self.type_expr()?),
                ))
            }
            Tok::LParen => {
                let t = self.type_expr()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Var(v) => Ok(TypeExpr::Var(v)),
            Tok::Num(n) => Ok(TypeExpr::Sym(n, Vec::new())),
            Tok::Atom(a) => {
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        args.push(self.type_expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                }
                Ok(TypeExpr::Sym(a, args))
            }
            Tok::LBracket => {
                if self.eat(&Tok::RBracket) {
                    return Ok(TypeExpr::Sym(NIL.into(), Vec::new()));
                }
                let mut items = vec![self.type_expr()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.type_expr()?);
                }
                let tail = if self.eat(&Tok::Bar) {
                    self.type_expr()?
                } else {
                    TypeExpr::Sym(NIL.into(), Vec::new())
                };
                self.expect(Tok::RBracket)?;
                Ok(items
                    .into_iter()
                    .rev()
                    .fold(tail, |t, h| TypeExpr::Sym(CONS.into(), vec![h, t])))
            }
            other => Err(ParseError::at(
                span,
                format!("expected a type, found {}", other.describe()),
            )),
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let span = self.span();
        self.anon = 0;
        let (name, head) = match self.term()? {
            Term::Const(c) => (c, Vec::new()),
            Term::Compound(f, args) => (f, args),
            Term::Var(_) => {
                return Err(ParseError::at(
                    span,
                    "clause head must be an atom or compound term",
                ))
            }
        };
        let body = if self.eat(&Tok::Neck) {
            self.disjunction()?
        } else {
            vec![Vec::new()]
        };
        self.expect(Tok::Dot)?;
        let mut clause = Clause {
            name,
            head,
            body,
            span,
        };
        name_anonymous(&mut clause);
        Ok(clause)
    }

    fn disjunction(&mut self) -> Result<Vec<GoalSeq>, ParseError> {
        let mut alts = self.conjunction()?;
        while self.eat(&Tok::Semi) {
            alts.extend(self.conjunction()?);
        }
        Ok(alts)
    }

    /// Conjunctions of parenthesized disjunctions are distributed into
    /// disjunctive normal form.
    fn conjunction(&mut self) -> Result<Vec<GoalSeq>, ParseError> {
        let mut acc: Vec<GoalSeq> = vec![Vec::new()];
        loop {
            let alts = self.goal_alternatives()?;
            let mut next = Vec::with_capacity(acc.len() * alts.len());
            for prefix in &acc {
                for alt in &alts {
                    let mut seq = prefix.clone();
                    seq.extend(alt.iter().cloned());
                    next.push(seq);
                }
            }
            acc = next;
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(acc)
    }

    fn goal_alternatives(&mut self) -> Result<Vec<GoalSeq>, ParseError> {
        if self.eat(&Tok::LParen) {
            let alts = self.disjunction()?;
            self.expect(Tok::RParen)?;
            return Ok(alts);
        }
        if matches!(self.peek(), Tok::Atom(a) if a == "true")
            && matches!(
                self.peek_at(1),
                Tok::Comma | Tok::Semi | Tok::Dot | Tok::RParen
            )
        {
            self.bump();
            return Ok(vec![Vec::new()]);
        }
        Ok(vec![vec![self.goal()?]])
    }

    fn goal(&mut self) -> Result<Goal, ParseError> {
        let span = self.span();
        let left = self.term()?;
        if self.eat(&Tok::Eq) {
            let right = self.term()?;
            return Ok(Goal::Unify(left, right));
        }
        match left {
            Term::Const(p) => Ok(Goal::Call(p, Vec::new())),
            Term::Compound(p, args) => Ok(Goal::Call(p, args)),
            Term::Var(_) => Err(ParseError::at(span, "a variable cannot be used as a goal")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let span = self.span();
        match self.bump() {
            Tok::Var(v) if v == "_" => {
                self.anon += 1;
                Ok(Term::Var(format!("_\u{0}{}", self.anon)))
            }
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Num(n) => Ok(Term::Const(n)),
            Tok::Atom(a) => {
                if self.eat(&Tok::LParen) {
                    let mut args = vec![self.term()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Term::Compound(a, args))
                } else {
                    Ok(Term::Const(a))
                }
            }
            Tok::LBracket => {
                if self.eat(&Tok::RBracket) {
                    return Ok(Term::Const(NIL.into()));
                }
                let mut items = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.term()?);
                }
                let tail = if self.eat(&Tok::Bar) {
                    self.term()?
                } else {
                    Term::Const(NIL.into())
                };
                self.expect(Tok::RBracket)?;
                Ok(items
                    .into_iter()
                    .rev()
                    .fold(tail, |t, h| Term::Compound(CONS.into(), vec![h, t])))
            }
            other => Err(ParseError::at(
                span,
                format!("expected a term, found {}", other.describe()),
            )),
        }
    }
}

/// Gives every `_` occurrence a distinct name not otherwise used in the clause.
fn name_anonymous(clause: &mut Clause) {
    let vars = clause.vars();
    if !vars.iter().any(|v| v.starts_with("_\u{0}")) {
        return;
    }
    let mut taken: BTreeSet<String> = vars
        .iter()
        .filter(|v| !v.starts_with("_\u{0}"))
        .cloned()
        .collect();
    let mut counter = 0usize;
    let mut mapping = alloc::collections::BTreeMap::new();
    let mut f = |v: &str| -> String {
        if !v.starts_with("_\u{0}") {
            return v.into();
        }
        mapping
            .entry(String::from(v))
            .or_insert_with(|| loop {
                counter += 1;
                let candidate = format!("_G{counter}");
                if taken.insert(candidate.clone()) {
                    break candidate;
                }
            })
            .clone()
    };
    clause.head = clause.head.iter().map(|t| t.rename(&mut f)).collect();
    clause.body = clause
        .body
        .iter()
        .map(|seq| seq.iter().map(|g| g.rename(&mut f)).collect())
        .collect();
}

/// Parses a whole program in the surface grammar.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    Parser::new(src)?.program()
}

/// Parses a single term, e.g. a ground value written in a universe file.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

/// Parses a type such as `mu a. ([] + [int|a])` or `int + atom`.
pub fn parse_type_expr(src: &str) -> Result<TypeExpr, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.type_expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

/// Parses a predicate type `t1 * ... * tn -> bool` into its argument types.
pub fn parse_pred_type_expr(src: &str) -> Result<Vec<TypeExpr>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut args = Vec::new();
    if !(matches!(p.peek(), Tok::Atom(a) if a == "bool") || *p.peek() == Tok::Arrow) {
        args.push(p.type_expr()?);
        while p.eat(&Tok::Star) {
            args.push(p.type_expr()?);
        }
    }
    p.expect(Tok::Arrow)?;
    match p.bump() {
        Tok::Atom(a) if a == "bool" => {}
        _ => {
            return Err(ParseError::at(
                p.span(),
                "predicate types must end in `-> bool`",
            ))
        }
    }
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(args)
}
