//! Higher-order recursion schemes and their translation to closed λY-terms.
//!
//! File format: `const` declarations for terminals as in term files, then one
//! rule per nonterminal, each ended by `.`:
//!
//! ```text
//! const c : o;
//! const a : o -> o -> o;
//! S : o = F c .
//! F x : o -> o = a x (F x) .
//! ```

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::syntax::{parse_open_term, parse_type, Name, Signature, SimpleType, Term};

/// A rule `F x₁ … xₙ = body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub ty: SimpleType,
    pub params: Vec<(String, SimpleType)>,
    /// The right-hand side; nonterminals and parameters occur as free variables.
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub signature: Signature,
    pub rules: Vec<Rule>,
    pub start: String,
}

fn scheme_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Scheme(format!("line {line}: {msg}"))
}

/// Splits `text` into statements ended by `;` or `.`, with the line on which
/// each starts. Comments run from `#` to the end of the line.
fn statements(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 1;
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for ch in line.chars() {
            if cur.trim().is_empty() {
                start = i + 1;
            }
            if ch == ';' || ch == '.' {
                if !cur.trim().is_empty() {
                    out.push((start, cur.trim().to_string()));
                }
                cur.clear();
            } else {
                cur.push(ch);
            }
        }
        cur.push(' ');
    }
    if !cur.trim().is_empty() {
        out.push((start, cur.trim().to_string()));
    }
    out
}

impl Scheme {
    pub fn parse(text: &str) -> Result<Scheme> {
        let stmts = statements(text);
        let mut decls = Vec::new();
        let mut heads: Vec<(usize, String, Vec<String>, SimpleType, String)> = Vec::new();
        for (line, s) in stmts {
            if let Some(rest) = s.strip_prefix("const ") {
                let (name, ty) = rest
                    .split_once(':')
                    .ok_or_else(|| scheme_err(line, "expected `const name : type`"))?;
                decls.push((name.trim().to_string(), parse_type(ty.trim())?, line));
                continue;
            }
            let (lhs, rhs) = s.split_once('=').ok_or_else(|| {
                scheme_err(line, format!("expected `F x : type = body`, found `{s}`"))
            })?;
            let (head, ty) = lhs
                .split_once(':')
                .ok_or_else(|| scheme_err(line, "missing type of the nonterminal"))?;
            let mut words = head.split_whitespace().map(str::to_string);
            let name = words
                .next()
                .ok_or_else(|| scheme_err(line, "missing nonterminal name"))?;
            heads.push((
                line,
                name,
                words.collect(),
                parse_type(ty.trim())?,
                rhs.trim().to_string(),
            ));
        }
        let tree = decls
            .iter()
            .all(|(_, t, _)| t.is_base() || *t == SimpleType::binary());
        let mut signature = if tree {
            Signature::tree()
        } else {
            Signature::general()
        };
        for (name, ty, line) in decls {
            signature
                .declare(&name, ty)
                .map_err(|e| scheme_err(line, e))?;
        }
        let nonterminals: Vec<(String, SimpleType)> =
            heads.iter().map(|h| (h.1.clone(), h.3.clone())).collect();
        let mut seen = HashSet::new();
        let mut rules = Vec::new();
        for (line, name, params, ty, rhs) in heads {
            if !seen.insert(name.clone()) {
                return Err(scheme_err(
                    line,
                    format!("nonterminal `{name}` has two rules"),
                ));
            }
            if signature.get(&name).is_some() {
                return Err(scheme_err(
                    line,
                    format!("`{name}` is both a terminal and a nonterminal"),
                ));
            }
            let (doms, _) = ty.uncurry();
            if params.len() > doms.len() {
                return Err(scheme_err(
                    line,
                    format!("`{name} : {ty}` takes at most {} parameters", doms.len()),
                ));
            }
            let params: Vec<(String, SimpleType)> = params
                .into_iter()
                .zip(doms.iter().map(|d| (*d).clone()))
                .collect();
            for (p, _) in &params {
                if nonterminals.iter().any(|(n, _)| n == p) {
                    return Err(scheme_err(
                        line,
                        format!("parameter `{p}` shadows a nonterminal"),
                    ));
                }
            }
            let mut scope: Vec<(&str, SimpleType)> = nonterminals
                .iter()
                .map(|(n, t)| (n.as_str(), t.clone()))
                .collect();
            scope.extend(params.iter().map(|(n, t)| (n.as_str(), t.clone())));
            let body =
                parse_open_term(&rhs, &signature, &scope).map_err(|e| scheme_err(line, e))?;
            let want = params.iter().fold(ty.clone(), |t, _| {
                t.split_arrow().map(|(_, b)| b.clone()).unwrap_or(t)
            });
            let got = body.type_of().map_err(|e| scheme_err(line, e))?;
            if got != want {
                return Err(scheme_err(
                    line,
                    format!("body of `{name}` has type {got}, expected {want}"),
                ));
            }
            rules.push(Rule {
                name,
                ty,
                params,
                body,
            });
        }
        let start = "S".to_string();
        match rules.iter().find(|r| r.name == start) {
            Some(r) if r.ty.is_base() => {}
            Some(r) => {
                return Err(Error::Scheme(format!(
                    "start symbol `S` has type {}, expected o",
                    r.ty
                )))
            }
            None => return Err(Error::Scheme("no rule for the start symbol `S`".into())),
        }
        Ok(Scheme {
            signature,
            rules,
            start,
        })
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

/// Translates a scheme into a closed λY-term of type `o` with the same value
/// tree. Each nonterminal is replaced by its definition, abstracted over its
/// parameters; a nonterminal used within its own expansion is bound by a
/// fixpoint at its own type, so no type order increases.
pub fn scheme_to_lamy(s: &Scheme) -> Result<Term> {
    let mut stack = Vec::new();
    let t = build(s, &s.start, &mut stack)?;
    debug_assert!(t.is_closed());
    Ok(t)
}

fn build(s: &Scheme, name: &str, stack: &mut Vec<String>) -> Result<Term> {
    let rule = s
        .rule(name)
        .ok_or_else(|| Error::Scheme(format!("no rule for `{name}`")))?;
    stack.push(name.to_string());
    let mut subst = BTreeMap::new();
    for (v, _) in rule.body.free_vars() {
        let is_param = rule.params.iter().any(|(p, _)| **p == *v);
        if is_param || stack.iter().any(|n| **n == *v) {
            continue;
        }
        let t = build(s, &v, stack)?;
        subst.insert(v.clone(), t);
    }
    stack.pop();
    let body = rule.body.substitute(&subst)?;
    let lam = rule
        .params
        .iter()
        .rev()
        .fold(body, |b, (p, ty)| Term::abs(p, ty.clone(), b));
    let recursive = lam.free_vars().iter().any(|(v, _)| **v == *name);
    if recursive {
        let f: Name = name.into();
        Term::fix_app(Term::abs(&f, rule.ty.clone(), lam))
    } else {
        Ok(lam)
    }
}
