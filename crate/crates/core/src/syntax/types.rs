use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Simple types over the single base type `o`, plus the tagged atomic types
/// `[α]` that reflection introduces.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SimpleType {
    Base,
    Arrow(Arc<SimpleType>, Arc<SimpleType>),
    /// `[α]`: atomic, inhabited by the enumerated elements of a model at `α`.
    Tag(Arc<SimpleType>),
}

impl SimpleType {
    pub fn arrow(dom: SimpleType, cod: SimpleType) -> Self {
        SimpleType::Arrow(Arc::new(dom), Arc::new(cod))
    }

    /// `a1 -> ... -> an -> res`
    pub fn arrows<I>(args: I, res: SimpleType) -> Self
    where
        I: IntoIterator<Item = SimpleType>,
        I::IntoIter: DoubleEndedIterator,
    {
        args.into_iter()
            .rev()
            .fold(res, |acc, a| SimpleType::arrow(a, acc))
    }

    pub fn tag(of: SimpleType) -> Self {
        SimpleType::Tag(Arc::new(of))
    }

    /// `o -> o -> o`
    pub fn binary() -> Self {
        SimpleType::arrows([SimpleType::Base, SimpleType::Base], SimpleType::Base)
    }

    /// Type of the fixpoint combinator at `alpha`: `(alpha -> alpha) -> alpha`.
    pub fn fix_type(alpha: &SimpleType) -> Self {
        SimpleType::arrow(
            SimpleType::arrow(alpha.clone(), alpha.clone()),
            alpha.clone(),
        )
    }

    pub fn is_base(&self) -> bool {
        matches!(self, SimpleType::Base)
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(self, SimpleType::Arrow(..))
    }

    pub fn split_arrow(&self) -> Option<(&SimpleType, &SimpleType)> {
        match self {
            SimpleType::Arrow(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// Argument types and final atomic result.
    pub fn uncurry(&self) -> (Vec<&SimpleType>, &SimpleType) {
        let mut args = Vec::new();
        let mut cur = self;
        while let SimpleType::Arrow(a, b) = cur {
            args.push(a.as_ref());
            cur = b;
        }
        (args, cur)
    }

    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }

    pub fn order(&self) -> usize {
        match self {
            SimpleType::Base | SimpleType::Tag(_) => 0,
            SimpleType::Arrow(a, b) => (1 + a.order()).max(b.order()),
        }
    }

    pub fn contains_tag(&self) -> bool {
        match self {
            SimpleType::Base => false,
            SimpleType::Tag(_) => true,
            SimpleType::Arrow(a, b) => a.contains_tag() || b.contains_tag(),
        }
    }

    /// Printing form usable after `omega:` and friends.
    pub fn atomic_string(&self) -> String {
        if self.is_atomic() {
            self.to_string()
        } else {
            format!("({self})")
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base => write!(f, "o"),
            SimpleType::Tag(a) => write!(f, "[{a}]"),
            SimpleType::Arrow(a, b) => {
                if a.is_atomic() {
                    write!(f, "{a} -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
        }
    }
}

pub(crate) const RESERVED: &[&str] = &["Y", "omega", "Omega", "case", "let", "main", "const", "o"];

/// Typed constants available to terms. `Y`, `omega` and `Omega` exist at every
/// type implicitly and are never stored here.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    constants: BTreeMap<String, SimpleType>,
    tree_signature: bool,
}

impl Signature {
    /// A tree signature: every constant is `o` or `o -> o -> o`.
    pub fn tree() -> Self {
        Signature {
            constants: BTreeMap::new(),
            tree_signature: true,
        }
    }

    /// A signature that only requires constants of order at most one.
    pub fn general() -> Self {
        Signature {
            constants: BTreeMap::new(),
            tree_signature: false,
        }
    }

    /// Convenience for tests and examples: `Signature::with_tree(&[("c", 0), ("a", 2)])`.
    pub fn with_tree(consts: &[(&str, usize)]) -> Result<Self> {
        let mut sig = Signature::tree();
        for (name, arity) in consts {
            let ty = SimpleType::arrows(vec![SimpleType::Base; *arity], SimpleType::Base);
            sig.declare(name, ty)?;
        }
        Ok(sig)
    }

    pub fn declare(&mut self, name: &str, ty: SimpleType) -> Result<()> {
        if RESERVED.contains(&name) {
            return Err(Error::Signature(format!("`{name}` is reserved")));
        }
        if ty.contains_tag() {
            return Err(Error::Signature(format!(
                "constant `{name}` cannot have a tagged type"
            )));
        }
        if self.tree_signature && !(ty.is_base() || ty == SimpleType::binary()) {
            return Err(Error::Signature(format!(
                "constant `{name} : {ty}` is not of type o or o -> o -> o in a tree signature"
            )));
        }
        if ty.order() > 1 {
            return Err(Error::Signature(format!(
                "constant `{name} : {ty}` has order above 1"
            )));
        }
        match self.constants.get(name) {
            Some(prev) if *prev != ty => Err(Error::Signature(format!(
                "constant `{name}` redeclared with a different type"
            ))),
            _ => {
                self.constants.insert(name.to_string(), ty);
                Ok(())
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&SimpleType> {
        self.constants.get(name)
    }

    pub fn is_tree_signature(&self) -> bool {
        self.tree_signature
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SimpleType)> {
        self.constants.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Constants of type `o`.
    pub fn leaves(&self) -> Vec<&str> {
        self.iter()
            .filter(|(_, t)| t.is_base())
            .map(|(n, _)| n)
            .collect()
    }

    /// Constants of type `o -> o -> o`.
    pub fn binaries(&self) -> Vec<&str> {
        self.iter()
            .filter(|(_, t)| **t == SimpleType::binary())
            .map(|(n, _)| n)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }
}
