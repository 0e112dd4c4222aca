//! Finite labelled binary trees: Böhm tree prefixes.

use std::fmt;

use crate::error::{Error, Result};
use crate::syntax::{Signature, SimpleType, Term};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Label {
    Const(String),
    /// A constant carrying the index of a model element.
    Annotated(String, usize),
    /// Divergence.
    Omega,
    /// The cut `ω` of a truncation.
    Cut,
}

impl Label {
    pub fn name(&self) -> &str {
        match self {
            Label::Const(n) | Label::Annotated(n, _) => n,
            Label::Omega => "Omega",
            Label::Cut => "omega",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Annotated(n, k) => write!(f, "{n}^{{#{k}}}"),
            other => write!(f, "{}", other.name()),
        }
    }
}

/// A finite tree whose internal nodes have exactly two children.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LabeledTree {
    pub label: Label,
    pub children: Vec<LabeledTree>,
}

impl LabeledTree {
    pub fn leaf(label: Label) -> Self {
        LabeledTree {
            label,
            children: Vec::new(),
        }
    }

    pub fn constant(name: &str) -> Self {
        LabeledTree::leaf(Label::Const(name.to_string()))
    }

    pub fn omega() -> Self {
        LabeledTree::leaf(Label::Omega)
    }

    pub fn cut() -> Self {
        LabeledTree::leaf(Label::Cut)
    }

    pub fn node(label: Label, left: LabeledTree, right: LabeledTree) -> Self {
        LabeledTree {
            label,
            children: vec![left, right],
        }
    }

    pub fn binary(name: &str, left: LabeledTree, right: LabeledTree) -> Self {
        LabeledTree::node(Label::Const(name.to_string()), left, right)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(LabeledTree::size).sum::<usize>()
    }

    /// Length of the longest path, a single leaf having height 0.
    pub fn height(&self) -> usize {
        self.children
            .iter()
            .map(|c| 1 + c.height())
            .max()
            .unwrap_or(0)
    }

    pub fn contains(&self, pred: &dyn Fn(&Label) -> bool) -> bool {
        pred(&self.label) || self.children.iter().any(|c| c.contains(pred))
    }

    pub fn is_cut_free(&self) -> bool {
        !self.contains(&|l| *l == Label::Cut)
    }

    /// Replaces every subtree at depth `n` by a cut.
    pub fn truncate(&self, n: usize) -> LabeledTree {
        if n == 0 {
            return LabeledTree::cut();
        }
        LabeledTree {
            label: self.label.clone(),
            children: self.children.iter().map(|c| c.truncate(n - 1)).collect(),
        }
    }

    /// Drops annotations.
    pub fn erase_annotations(&self) -> LabeledTree {
        let label = match &self.label {
            Label::Annotated(n, _) => Label::Const(n.clone()),
            l => l.clone(),
        };
        LabeledTree {
            label,
            children: self
                .children
                .iter()
                .map(LabeledTree::erase_annotations)
                .collect(),
        }
    }

    /// The node at `address`, a string over `1` and `2`.
    pub fn at(&self, address: &str) -> Option<&LabeledTree> {
        let mut cur = self;
        for ch in address.chars() {
            let i = match ch {
                '1' => 0,
                '2' => 1,
                _ => return None,
            };
            cur = cur.children.get(i)?;
        }
        Some(cur)
    }

    /// All addresses with their labels, in preorder.
    pub fn nodes(&self) -> Vec<(String, &Label)> {
        fn go<'a>(t: &'a LabeledTree, addr: &mut String, out: &mut Vec<(String, &'a Label)>) {
            out.push((addr.clone(), &t.label));
            for (i, c) in t.children.iter().enumerate() {
                addr.push(if i == 0 { '1' } else { '2' });
                go(c, addr, out);
                addr.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut String::new(), &mut out);
        out
    }

    /// Reads the tree back as a closed term of type `o` over `sig`: cuts become
    /// `omega:o`, divergence `Omega:o`.
    pub fn to_term(&self, sig: &Signature) -> Result<Term> {
        let head = match &self.label {
            Label::Omega => return Ok(Term::Omega(SimpleType::Base)),
            Label::Cut => return Ok(Term::LittleOmega(SimpleType::Base)),
            Label::Const(n) | Label::Annotated(n, _) => {
                let ty = sig
                    .get(n)
                    .ok_or_else(|| Error::UnknownLabel(n.clone()))?
                    .clone();
                if ty.arity() != self.children.len() {
                    return Err(Error::UnknownLabel(format!(
                        "{n} with {} children",
                        self.children.len()
                    )));
                }
                Term::constant(n, ty)
            }
        };
        let args = self
            .children
            .iter()
            .map(|c| c.to_term(sig))
            .collect::<Result<Vec<_>>>()?;
        Ok(Term::apps(head, args))
    }

    /// Indented rendering, one node per line prefixed by its address (`ε` at the root).
    pub fn indented(&self) -> String {
        let mut s = String::new();
        for (addr, label) in self.nodes() {
            let depth = addr.len();
            let a = if addr.is_empty() {
                "ε".to_string()
            } else {
                addr
            };
            s.push_str(&format!("{}{a} {label}\n", "  ".repeat(depth)));
        }
        s
    }

    /// Parses the s-expression form, e.g. `(a (c) (Omega))`.
    pub fn parse_sexpr(text: &str) -> Result<LabeledTree> {
        let toks: Vec<String> = text
            .replace('(', " ( ")
            .replace(')', " ) ")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let mut pos = 0;
        let t = parse_node(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(Error::Syntax {
                line: 1,
                col: pos,
                msg: "trailing input after tree".into(),
            });
        }
        Ok(t)
    }
}

fn parse_node(toks: &[String], pos: &mut usize) -> Result<LabeledTree> {
    let err = |pos: usize, msg: &str| Error::Syntax {
        line: 1,
        col: pos,
        msg: msg.to_string(),
    };
    if toks.get(*pos).map(String::as_str) != Some("(") {
        return Err(err(*pos, "expected `(`"));
    }
    *pos += 1;
    let name = toks
        .get(*pos)
        .ok_or_else(|| err(*pos, "expected a label"))?
        .clone();
    *pos += 1;
    let label = match name.as_str() {
        "Omega" => Label::Omega,
        "omega" => Label::Cut,
        _ => match name.split_once("^{#") {
            Some((n, rest)) => {
                let k = rest
                    .strip_suffix('}')
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| err(*pos, "malformed annotation"))?;
                Label::Annotated(n.to_string(), k)
            }
            None => Label::Const(name),
        },
    };
    let mut children = Vec::new();
    while toks.get(*pos).map(String::as_str) == Some("(") {
        children.push(parse_node(toks, pos)?);
    }
    if toks.get(*pos).map(String::as_str) != Some(")") {
        return Err(err(*pos, "expected `)`"));
    }
    *pos += 1;
    Ok(LabeledTree { label, children })
}

impl fmt::Display for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        write!(f, ")")
    }
}
