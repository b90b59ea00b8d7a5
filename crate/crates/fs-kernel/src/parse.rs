//! Recursive-descent parser for the surface syntax.
//!
//! An identifier directly followed by `^` is an expansion variable; any other
//! identifier in type position is a type variable. `all`, `ex`, `omega` and
//! `id` are reserved.

use thiserror::Error;

use crate::syntax::{Binding, Constraint, Expansion, Name, Skeleton, Substitution, Term, Type, TypeEnv, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Lambda,
    Dot,
    At,
    Arrow,
    All,
    Ex,
    Omega,
    Id,
    Caret,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LAngle,
    RAngle,
    Comma,
    Semi,
    Colon,
    Assign,
    Tri,
    Leq,
    And,
    Plus,
    Empty,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Eof => "end of input".to_string(),
        other => format!("{other:?}"),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '\\' | 'λ' => Tok::Lambda,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '→' => Tok::Arrow,
            '∀' => Tok::All,
            '∃' => Tok::Ex,
            'ω' => Tok::Omega,
            'ι' => Tok::Id,
            '∅' => Tok::Empty,
            '^' => Tok::Caret,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '⟨' => Tok::LAngle,
            '⟩' | '>' => Tok::RAngle,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '▷' => Tok::Tri,
            '≤' | '⋖' => Tok::Leq,
            '∧' | '&' => Tok::And,
            '+' => Tok::Plus,
            '-' if chars.get(i + 1) == Some(&'>') => {
                adv = 2;
                Tok::Arrow
            }
            '|' if chars.get(i + 1) == Some(&'>') => {
                adv = 2;
                Tok::Tri
            }
            '<' if chars.get(i + 1) == Some(&'=') => {
                adv = 2;
                Tok::Leq
            }
            '<' => Tok::LAngle,
            ':' if chars.get(i + 1) == Some(&'=') => {
                adv = 2;
                Tok::Assign
            }
            ':' => Tok::Colon,
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i + adv < chars.len() && {
                    let d = chars[i + adv];
                    d.is_alphanumeric() || d == '_' || d == '\''
                } {
                    adv += 1;
                }
                let word: String = chars[start..start + adv].iter().collect();
                match word.as_str() {
                    "all" => Tok::All,
                    "ex" => Tok::Ex,
                    "omega" => Tok::Omega,
                    "id" => Tok::Id,
                    _ => Tok::Ident(word),
                }
            }
            other => {
                return Err(ParseError { line, col, msg: format!("unexpected character `{other}`") });
            }
        };
        out.push((tok, l0, c0));
        i += adv;
        col += adv;
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (_, line, col) = &self.toks[self.pos];
        Err(ParseError { line: *line, col: *col, msg: msg.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", describe(self.peek())))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&describe(&t))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn at_evar(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Caret
    }

    fn finish<T>(&mut self, v: T) -> PResult<T> {
        if *self.peek() == Tok::Eof {
            Ok(v)
        } else {
            self.unexpected("end of input")
        }
    }

    // Binder list of `all a b. ...`.
    fn binders(&mut self) -> PResult<Vec<Name>> {
        let mut names = vec![self.ident()?];
        while let Tok::Ident(_) = self.peek() {
            names.push(self.ident()?);
        }
        self.expect(Tok::Dot)?;
        Ok(names)
    }

    fn set(&mut self) -> PResult<VarSet> {
        if self.eat(&Tok::Empty) {
            return Ok(VarSet::new());
        }
        self.expect(Tok::LBrace)?;
        let mut s = VarSet::new();
        if self.eat(&Tok::RBrace) {
            return Ok(s);
        }
        loop {
            s.insert(self.ident()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(s)
    }

    fn evar_head(&mut self) -> PResult<(Name, VarSet)> {
        let s = self.ident()?;
        self.expect(Tok::Caret)?;
        Ok((s, self.set()?))
    }

    // ---------------------------------------------------------------- terms

    fn term(&mut self) -> PResult<Term> {
        if self.eat(&Tok::Lambda) {
            let x = self.ident()?;
            self.expect(Tok::Dot)?;
            return Ok(Term::Abs(x, Box::new(self.term()?)));
        }
        let mut t = self.term_atom()?;
        while self.eat(&Tok::At) {
            let a = if *self.peek() == Tok::Lambda { self.term()? } else { self.term_atom()? };
            t = Term::App(Box::new(t), Box::new(a));
        }
        Ok(t)
    }

    fn term_atom(&mut self) -> PResult<Term> {
        match self.peek() {
            Tok::Ident(_) => Ok(Term::Var(self.ident()?)),
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => self.unexpected("a term"),
        }
    }

    // ---------------------------------------------------------------- types

    fn typ(&mut self) -> PResult<Type> {
        let d = self.type_prefix()?;
        if self.eat(&Tok::Arrow) {
            Ok(Type::Arrow(Box::new(d), Box::new(self.typ()?)))
        } else {
            Ok(d)
        }
    }

    fn type_prefix(&mut self) -> PResult<Type> {
        if self.eat(&Tok::All) {
            let names = self.binders()?;
            let body = self.type_prefix()?;
            return Ok(names.iter().rev().fold(body, |b, a| Type::Forall(a.clone(), Box::new(b))));
        }
        if self.at_evar() {
            let (s, delta) = self.evar_head()?;
            return Ok(Type::EVar(s, delta, Box::new(self.type_prefix()?)));
        }
        match self.peek() {
            Tok::Ident(_) => Ok(Type::Var(self.ident()?)),
            Tok::LParen => {
                self.bump();
                let t = self.typ()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => self.unexpected("a type"),
        }
    }

    // ----------------------------------------------------------- expansions

    fn expansion(&mut self) -> PResult<Expansion> {
        let mut i = self.exp_prefix()?;
        while self.eat(&Tok::Tri) {
            i = Expansion::Sub(Box::new(i), self.typ()?);
        }
        Ok(i)
    }

    fn exp_prefix(&mut self) -> PResult<Expansion> {
        if self.eat(&Tok::All) {
            let names = self.binders()?;
            let body = self.exp_prefix()?;
            return Ok(names.iter().rev().fold(body, |b, a| Expansion::Forall(a.clone(), Box::new(b))));
        }
        if self.at_evar() {
            let (s, delta) = self.evar_head()?;
            return Ok(Expansion::EVar(s, delta, Box::new(self.exp_prefix()?)));
        }
        match self.peek() {
            Tok::Id => {
                self.bump();
                Ok(Expansion::Id)
            }
            Tok::LParen => {
                self.bump();
                let i = self.expansion()?;
                self.expect(Tok::RParen)?;
                Ok(i)
            }
            _ => self.unexpected("an expansion"),
        }
    }

    fn subst(&mut self) -> PResult<Substitution> {
        self.expect(Tok::LBrack)?;
        let mut out = Vec::new();
        if !self.eat(&Tok::RBrack) {
            loop {
                let v = self.ident()?;
                self.expect(Tok::Assign)?;
                let save = self.pos;
                match self.expansion() {
                    Ok(i) if matches!(self.peek(), Tok::Comma | Tok::RBrack) => out.push(Binding::Exp(v, i)),
                    _ => {
                        self.pos = save;
                        out.push(Binding::Type(v, self.typ()?));
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrack)?;
        }
        Ok(Substitution(out))
    }

    // ---------------------------------------------------------- constraints

    fn constraint(&mut self) -> PResult<Constraint> {
        let mut c = self.cons_prefix()?;
        while self.eat(&Tok::And) {
            c = Constraint::And(Box::new(c), Box::new(self.cons_prefix()?));
        }
        Ok(c)
    }

    fn cons_prefix(&mut self) -> PResult<Constraint> {
        if self.eat(&Tok::Ex) {
            let names = self.binders()?;
            let body = self.cons_prefix()?;
            return Ok(names.iter().rev().fold(body, |b, a| Constraint::Exists(a.clone(), Box::new(b))));
        }
        if self.at_evar() {
            let save = self.pos;
            if let Ok(g) = self.guard() {
                return Ok(g);
            }
            self.pos = save;
        }
        match self.peek() {
            Tok::Omega => {
                self.bump();
                Ok(Constraint::Omega)
            }
            Tok::LParen => {
                let save = self.pos;
                self.bump();
                if let Ok(c) = self.constraint() {
                    if self.eat(&Tok::RParen) && *self.peek() != Tok::Leq && *self.peek() != Tok::Arrow {
                        return Ok(c);
                    }
                }
                self.pos = save;
                self.cons_atom()
            }
            _ => self.cons_atom(),
        }
    }

    fn guard(&mut self) -> PResult<Constraint> {
        let s = self.ident()?;
        self.expect(Tok::Caret)?;
        self.expect(Tok::LBrace)?;
        let mut delta = VarSet::new();
        if !self.eat(&Tok::Semi) {
            loop {
                delta.insert(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Semi)?;
        }
        let t = self.typ()?;
        self.expect(Tok::RBrace)?;
        Ok(Constraint::Guard(s, delta, t, Box::new(self.cons_prefix()?)))
    }

    fn cons_atom(&mut self) -> PResult<Constraint> {
        let t1 = self.typ()?;
        self.expect(Tok::Leq)?;
        let t2 = self.typ()?;
        Ok(Constraint::Atom(t1, t2))
    }

    // --------------------------------------------------------- environments

    fn env_entries(&mut self, close: &Tok) -> PResult<TypeEnv> {
        let mut env = TypeEnv::new();
        if self.peek() == close {
            return Ok(env);
        }
        loop {
            let x = self.ident()?;
            self.expect(Tok::Colon)?;
            let t = self.typ()?;
            env.0.push((x, t));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(env)
    }

    fn env(&mut self) -> PResult<TypeEnv> {
        if self.eat(&Tok::Empty) {
            return Ok(TypeEnv::new());
        }
        self.expect(Tok::LBrace)?;
        let env = self.env_entries(&Tok::RBrace)?;
        self.expect(Tok::RBrace)?;
        Ok(env)
    }

    // ------------------------------------------------------------ skeletons

    fn skel(&mut self) -> PResult<Skeleton> {
        if self.eat(&Tok::Lambda) {
            let x = self.ident()?;
            self.expect(Tok::Dot)?;
            return Ok(Skeleton::Abs(x, Box::new(self.skel()?)));
        }
        let mut q = self.skel_post()?;
        while self.eat(&Tok::At) {
            let a = if *self.peek() == Tok::Lambda { self.skel()? } else { self.skel_post()? };
            q = Skeleton::App(Box::new(q), Box::new(a));
        }
        Ok(q)
    }

    fn skel_post(&mut self) -> PResult<Skeleton> {
        let mut q = self.skel_prefix()?;
        loop {
            if self.eat(&Tok::Tri) {
                q = Skeleton::Sub(Box::new(q), self.typ()?);
            } else if self.eat(&Tok::Plus) {
                q = Skeleton::Weak(Box::new(q), self.env()?);
            } else {
                return Ok(q);
            }
        }
    }

    fn skel_prefix(&mut self) -> PResult<Skeleton> {
        if self.eat(&Tok::All) {
            let names = self.binders()?;
            let body = self.skel_prefix()?;
            return Ok(names.iter().rev().fold(body, |b, a| Skeleton::Forall(a.clone(), Box::new(b))));
        }
        if self.at_evar() {
            let (s, delta) = self.evar_head()?;
            return Ok(Skeleton::EVar(s, delta, Box::new(self.skel_prefix()?)));
        }
        match self.peek() {
            Tok::Ident(_) => {
                let x = self.ident()?;
                self.expect(Tok::LAngle)?;
                let env = if self.eat(&Tok::LBrace) {
                    let e = self.env_entries(&Tok::RBrace)?;
                    self.expect(Tok::RBrace)?;
                    e
                } else if self.eat(&Tok::Empty) {
                    TypeEnv::new()
                } else {
                    self.env_entries(&Tok::RAngle)?
                };
                self.expect(Tok::RAngle)?;
                Ok(Skeleton::Var(x, env))
            }
            Tok::LParen => {
                self.bump();
                let q = self.skel()?;
                self.expect(Tok::RParen)?;
                Ok(q)
            }
            _ => self.unexpected("a skeleton"),
        }
    }
}

macro_rules! entry {
    ($name:ident, $ty:ty, $method:ident) => {
        pub fn $name(src: &str) -> Result<$ty, ParseError> {
            let mut p = Parser::new(src)?;
            let v = p.$method()?;
            p.finish(v)
        }
    };
}

entry!(parse_term, Term, term);
entry!(parse_type, Type, typ);
entry!(parse_expansion, Expansion, expansion);
entry!(parse_subst, Substitution, subst);
entry!(parse_constraint, Constraint, constraint);
entry!(parse_env, TypeEnv, env);
entry!(parse_skeleton, Skeleton, skel);
entry!(parse_set, VarSet, set);
