//! Concrete syntax.
//!
//! ```text
//! program := item*
//! item    := 'const' IDENT ':' type ';'?
//!          | 'let' IDENT '=' term ';'?
//!          | 'main' '=' term ';'?
//! type    := atype ('->' type)?
//! atype   := 'o' | '(' type ')' | '[' type ']'
//! term    := '\' (IDENT ':' type)+ '.' term | app
//! app     := atom+ ('\' ... )?
//! atom    := IDENT | IDENT '^{#' NUM '}' | 'Y' atom | 'Y' ':' atype
//!          | 'omega' ':' atype | 'Omega' ':' atype | '#' NUM ':' atype
//!          | 'case' app '{' '#' NUM '->' term ('|' '#' NUM '->' term)* '}'
//!          | '(' term ')'
//! ```
//! `#` followed by anything but a digit starts a comment running to end of line.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::term::{Name, Term};
use super::types::{Signature, SimpleType};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Lambda,
    Dot,
    Colon,
    Semi,
    Eq,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Bar,
    Arrow,
    /// `^{#k}`
    Annot(usize),
    /// `#k`
    Hash(usize),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, msg: String| Error::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            let next = chars.get(i + 1).copied();
            if next.is_some_and(|d| d.is_ascii_digit()) {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let n: String = chars[start..j].iter().collect();
                let k = n
                    .parse()
                    .map_err(|_| syntax(tl, tc, format!("bad element index {n}")))?;
                out.push(Token {
                    tok: Tok::Hash(k),
                    line: tl,
                    col: tc,
                });
                adv(j - i, &mut i, &mut col);
            } else {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len()
                && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
            {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            adv(j - i, &mut i, &mut col);
            if word == "λ" {
                out.push(Token {
                    tok: Tok::Lambda,
                    line: tl,
                    col: tc,
                });
            } else {
                out.push(Token {
                    tok: Tok::Ident(word),
                    line: tl,
                    col: tc,
                });
            }
            continue;
        }
        let tok = match c {
            '\\' | 'λ' => Tok::Lambda,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            '=' => Tok::Eq,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '|' => Tok::Bar,
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Token {
                    tok: Tok::Arrow,
                    line: tl,
                    col: tc,
                });
                adv(2, &mut i, &mut col);
                continue;
            }
            '^' => {
                // ^{#k}
                let rest: String = chars[i..chars.len().min(i + 32)].iter().collect();
                let close = rest
                    .find('}')
                    .ok_or_else(|| syntax(tl, tc, "unterminated annotation".into()))?;
                let inner = &rest[1..close];
                let k = inner
                    .strip_prefix("{#")
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| {
                        syntax(
                            tl,
                            tc,
                            format!("malformed annotation `{}`", &rest[..=close]),
                        )
                    })?;
                out.push(Token {
                    tok: Tok::Annot(k),
                    line: tl,
                    col: tc,
                });
                let n = rest[..=close].chars().count();
                adv(n, &mut i, &mut col);
                continue;
            }
            other => return Err(syntax(tl, tc, format!("unexpected character `{other}`"))),
        };
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
        adv(1, &mut i, &mut col);
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// A parsed term file.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub signature: Signature,
    pub lets: Vec<(String, Term)>,
    pub main: Option<Term>,
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    sig: &'a Signature,
    lets: BTreeMap<String, Term>,
    scope: Vec<(Name, SimpleType)>,
}

const ITEM_KEYWORDS: &[&str] = &["let", "main", "const"];

impl<'a> Parser<'a> {
    fn new(toks: Vec<Token>, sig: &'a Signature) -> Self {
        Parser {
            toks,
            pos: 0,
            sig,
            lets: BTreeMap::new(),
            scope: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            other => {
                self.pos -= 1;
                self.fail(format!("expected identifier, found {other:?}"))
            }
        }
    }

    fn parse_type(&mut self) -> Result<SimpleType> {
        let a = self.parse_atype()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let b = self.parse_type()?;
            Ok(SimpleType::arrow(a, b))
        } else {
            Ok(a)
        }
    }

    fn parse_atype(&mut self) -> Result<SimpleType> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "o" => {
                self.bump();
                Ok(SimpleType::Base)
            }
            Tok::LParen => {
                self.bump();
                let t = self.parse_type()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::LBrack => {
                self.bump();
                let t = self.parse_type()?;
                self.expect(Tok::RBrack, "`]`")?;
                Ok(SimpleType::tag(t))
            }
            other => self.fail(format!("expected a type, found {other:?}")),
        }
    }

    fn at_term_end(&self) -> bool {
        match self.peek() {
            Tok::RParen | Tok::RBrace | Tok::Bar | Tok::Semi | Tok::Eof | Tok::LBrace => true,
            Tok::Ident(s) => ITEM_KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn parse_term(&mut self) -> Result<Term> {
        if *self.peek() == Tok::Lambda {
            return self.parse_abs();
        }
        self.parse_app()
    }

    fn parse_abs(&mut self) -> Result<Term> {
        self.expect(Tok::Lambda, "`\\`")?;
        let mut binders = Vec::new();
        loop {
            let name = self.ident()?;
            if super::types::RESERVED.contains(&name.as_str()) {
                return self.fail(format!("`{name}` cannot be bound"));
            }
            self.expect(Tok::Colon, "`:` after binder")?;
            let ty = self.parse_type()?;
            binders.push((Name::from(name), ty));
            if *self.peek() == Tok::Dot {
                self.bump();
                break;
            }
        }
        let n = binders.len();
        self.scope.extend(binders.iter().cloned());
        let body = self.parse_term();
        self.scope.truncate(self.scope.len() - n);
        let mut body = body?;
        for (name, ty) in binders.into_iter().rev() {
            body = Term::Abs {
                var: name,
                var_ty: ty,
                body: Arc::new(body),
            };
        }
        Ok(body)
    }

    fn parse_app(&mut self) -> Result<Term> {
        let (line, col) = self.here();
        let mut head = self.parse_atom()?;
        while !self.at_term_end() {
            let arg = if *self.peek() == Tok::Lambda {
                self.parse_abs()?
            } else {
                self.parse_atom()?
            };
            head = self.typed_app(head, arg, line, col)?;
        }
        Ok(head)
    }

    fn typed_app(&self, f: Term, a: Term, line: usize, col: usize) -> Result<Term> {
        let t = Term::app(f, a);
        t.type_of().map_err(|e| match e {
            Error::Type { msg, .. } => Error::Type {
                path: format!("{line}:{col}"),
                msg,
            },
            other => other,
        })?;
        Ok(t)
    }

    fn parse_atom(&mut self) -> Result<Term> {
        let (line, col) = self.here();
        match self.bump() {
            Tok::LParen => {
                let t = self.parse_term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Hash(k) => {
                self.expect(Tok::Colon, "`:` after element")?;
                match self.parse_atype()? {
                    SimpleType::Tag(of) => Ok(Term::Elem {
                        tag: (*of).clone(),
                        index: k,
                    }),
                    other => self.fail(format!(
                        "element #{k} must have a tagged type, found {other}"
                    )),
                }
            }
            Tok::Ident(s) => match s.as_str() {
                "Y" => {
                    if *self.peek() == Tok::Colon {
                        self.bump();
                        let a = self.parse_atype()?;
                        return Ok(Term::Fix(a));
                    }
                    let arg = if *self.peek() == Tok::Lambda {
                        self.parse_abs()?
                    } else {
                        self.parse_atom()?
                    };
                    Term::fix_app(arg).map_err(|e| match e {
                        Error::Type { msg, .. } => Error::Type {
                            path: format!("{line}:{col}"),
                            msg,
                        },
                        other => other,
                    })
                }
                "omega" | "Omega" => {
                    self.expect(Tok::Colon, "`:` and a type after omega")?;
                    let a = self.parse_atype()?;
                    Ok(if s == "omega" {
                        Term::LittleOmega(a)
                    } else {
                        Term::Omega(a)
                    })
                }
                "case" => self.parse_case(line, col),
                kw if ITEM_KEYWORDS.contains(&kw) || kw == "o" => {
                    self.pos -= 1;
                    self.fail(format!("unexpected keyword `{kw}`"))
                }
                _ => {
                    if let Some((n, ty)) = self.scope.iter().rev().find(|(n, _)| **n == *s) {
                        return Ok(Term::Var {
                            name: n.clone(),
                            ty: ty.clone(),
                        });
                    }
                    if let Some(t) = self.lets.get(&s) {
                        return Ok(t.clone());
                    }
                    let ty = match self.sig.get(&s) {
                        Some(t) => t.clone(),
                        None => return Err(Error::UnknownConstant { name: s, line, col }),
                    };
                    let annotation = if let Tok::Annot(k) = self.peek() {
                        let k = *k;
                        self.bump();
                        Some(k)
                    } else {
                        None
                    };
                    Ok(Term::Const {
                        name: s.into(),
                        ty,
                        annotation,
                    })
                }
            },
            other => {
                self.pos -= 1;
                self.fail(format!("expected a term, found {other:?}"))
            }
        }
    }

    fn parse_case(&mut self, line: usize, col: usize) -> Result<Term> {
        let scrutinee = self.parse_app()?;
        self.expect(Tok::LBrace, "`{` after case scrutinee")?;
        let mut branches: Vec<(usize, Term)> = Vec::new();
        loop {
            let k = match self.bump() {
                Tok::Hash(k) => k,
                other => {
                    self.pos -= 1;
                    return self.fail(format!("expected `#k ->` in case, found {other:?}"));
                }
            };
            self.expect(Tok::Arrow, "`->`")?;
            let b = self.parse_term()?;
            branches.push((k, b));
            match self.bump() {
                Tok::Bar => continue,
                Tok::RBrace => break,
                other => {
                    self.pos -= 1;
                    return self.fail(format!("expected `|` or `}}`, found {other:?}"));
                }
            }
        }
        branches.sort_by_key(|(k, _)| *k);
        if branches.iter().enumerate().any(|(i, (k, _))| i != *k) {
            return Err(Error::Syntax {
                line,
                col,
                msg: "case branches must cover #0..#n-1 exactly once".into(),
            });
        }
        let t = Term::case(scrutinee, branches.into_iter().map(|(_, b)| b).collect());
        t.type_of().map_err(|e| match e {
            Error::Type { msg, .. } => Error::Type {
                path: format!("{line}:{col}"),
                msg,
            },
            other => other,
        })?;
        Ok(t)
    }
}

/// Parses a closed term over `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term> {
    parse_open_term(text, sig, &[])
}

/// Parses a term whose free variables are declared in `free`.
pub fn parse_open_term(text: &str, sig: &Signature, free: &[(&str, SimpleType)]) -> Result<Term> {
    let mut p = Parser::new(lex(text)?, sig);
    p.scope = free
        .iter()
        .map(|(n, t)| (Name::from(*n), t.clone()))
        .collect();
    let t = p.parse_term()?;
    if *p.peek() != Tok::Eof {
        return p.fail(format!("trailing input {:?}", p.peek()));
    }
    Ok(t)
}

pub fn parse_type(text: &str) -> Result<SimpleType> {
    let sig = Signature::general();
    let mut p = Parser::new(lex(text)?, &sig);
    let t = p.parse_type()?;
    if *p.peek() != Tok::Eof {
        return p.fail(format!("trailing input {:?}", p.peek()));
    }
    Ok(t)
}

/// Parses a term file: `const` declarations, `let` bindings and `main`.
/// The signature is a tree signature when every constant permits it.
pub fn parse_program(text: &str) -> Result<Program> {
    let toks = lex(text)?;
    // Pass 1: constants, so terms may use constants declared later in the file.
    let mut decls: Vec<(String, SimpleType, usize, usize)> = Vec::new();
    {
        let empty = Signature::general();
        let mut p = Parser::new(toks.clone(), &empty);
        while *p.peek() != Tok::Eof {
            if let Tok::Ident(k) = p.peek().clone() {
                if k == "const" {
                    let (line, col) = p.here();
                    p.bump();
                    let name = p.ident()?;
                    p.expect(Tok::Colon, "`:` in const declaration")?;
                    let ty = p.parse_type()?;
                    decls.push((name, ty, line, col));
                    continue;
                }
            }
            p.bump();
        }
    }
    let tree = decls
        .iter()
        .all(|(_, t, _, _)| t.is_base() || *t == SimpleType::binary());
    let mut sig = if tree {
        Signature::tree()
    } else {
        Signature::general()
    };
    for (name, ty, line, col) in decls {
        sig.declare(&name, ty).map_err(|e| Error::Syntax {
            line,
            col,
            msg: e.to_string(),
        })?;
    }

    let mut prog = Program {
        signature: sig.clone(),
        ..Default::default()
    };
    let mut p = Parser::new(toks, &sig);
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Semi => {
                p.bump();
            }
            Tok::Ident(k) if k == "const" => {
                p.bump();
                p.ident()?;
                p.expect(Tok::Colon, "`:`")?;
                p.parse_type()?;
            }
            Tok::Ident(k) if k == "let" => {
                p.bump();
                let name = p.ident()?;
                p.expect(Tok::Eq, "`=` in let binding")?;
                let t = p.parse_term()?;
                if !t.is_closed() {
                    return p.fail(format!("let binding `{name}` is not closed"));
                }
                p.lets.insert(name.clone(), t.clone());
                prog.lets.push((name, t));
            }
            Tok::Ident(k) if k == "main" => {
                p.bump();
                p.expect(Tok::Eq, "`=` after main")?;
                let t = p.parse_term()?;
                if prog.main.is_some() {
                    return p.fail("duplicate main");
                }
                prog.main = Some(t);
            }
            other => {
                return p.fail(format!(
                    "expected `const`, `let` or `main`, found {other:?}"
                ))
            }
        }
    }
    Ok(prog)
}
