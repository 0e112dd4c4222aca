use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use super::types::SimpleType;
use crate::error::{Error, Result};

pub type Name = Arc<str>;

/// λY-terms, extended with annotated constants, tagged elements and `case`
/// for reflected terms.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Const {
        name: Name,
        ty: SimpleType,
        annotation: Option<usize>,
    },
    Var {
        name: Name,
        ty: SimpleType,
    },
    Abs {
        var: Name,
        var_ty: SimpleType,
        body: Arc<Term>,
    },
    App(Arc<Term>, Arc<Term>),
    /// `Y` at `α`, of type `(α -> α) -> α`.
    Fix(SimpleType),
    /// Divergence.
    Omega(SimpleType),
    /// The cut marker of Böhm tree truncations.
    LittleOmega(SimpleType),
    /// The `index`-th element of the model at `tag`, of type `[tag]`.
    Elem {
        tag: SimpleType,
        index: usize,
    },
    /// `case scrutinee { #0 -> b0 | #1 -> b1 | ... }`, branches indexed by element.
    Case {
        scrutinee: Arc<Term>,
        branches: Arc<[Term]>,
    },
}

impl Term {
    pub fn constant(name: &str, ty: SimpleType) -> Term {
        Term::Const {
            name: name.into(),
            ty,
            annotation: None,
        }
    }

    pub fn annotated(name: &str, ty: SimpleType, annotation: usize) -> Term {
        Term::Const {
            name: name.into(),
            ty,
            annotation: Some(annotation),
        }
    }

    pub fn var(name: &str, ty: SimpleType) -> Term {
        Term::Var {
            name: name.into(),
            ty,
        }
    }

    pub fn abs(var: &str, var_ty: SimpleType, body: Term) -> Term {
        Term::Abs {
            var: var.into(),
            var_ty,
            body: Arc::new(body),
        }
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Arc::new(fun), Arc::new(arg))
    }

    pub fn apps<I: IntoIterator<Item = Term>>(head: Term, args: I) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn elem(tag: SimpleType, index: usize) -> Term {
        Term::Elem { tag, index }
    }

    pub fn case(scrutinee: Term, branches: Vec<Term>) -> Term {
        Term::Case {
            scrutinee: Arc::new(scrutinee),
            branches: branches.into(),
        }
    }

    /// `Y m` with the fixpoint type read off `m : α -> α`.
    pub fn fix_app(m: Term) -> Result<Term> {
        let ty = m.type_of()?;
        match ty.split_arrow() {
            Some((a, b)) if a == b => Ok(Term::app(Term::Fix(a.clone()), m)),
            _ => Err(Error::Type {
                path: "Y".into(),
                msg: format!("argument of Y must have a type α -> α, found {ty}"),
            }),
        }
    }

    pub fn type_of(&self) -> Result<SimpleType> {
        let mut path = Vec::new();
        self.type_at(&mut path)
    }

    fn type_at(&self, path: &mut Vec<&'static str>) -> Result<SimpleType> {
        let err = |path: &Vec<&'static str>, msg: String| Error::Type {
            path: if path.is_empty() {
                "root".to_string()
            } else {
                path.join(".")
            },
            msg,
        };
        match self {
            Term::Const { ty, .. } | Term::Var { ty, .. } => Ok(ty.clone()),
            Term::Omega(ty) | Term::LittleOmega(ty) => Ok(ty.clone()),
            Term::Fix(a) => Ok(SimpleType::fix_type(a)),
            Term::Elem { tag, .. } => Ok(SimpleType::tag(tag.clone())),
            Term::Abs { var_ty, body, .. } => {
                path.push("body");
                let b = body.type_at(path)?;
                path.pop();
                Ok(SimpleType::arrow(var_ty.clone(), b))
            }
            Term::App(f, a) => {
                path.push("fun");
                let ft = f.type_at(path)?;
                path.pop();
                path.push("arg");
                let at = a.type_at(path)?;
                path.pop();
                match ft.split_arrow() {
                    None => Err(err(
                        path,
                        format!("applying non-function `{f}` of type {ft}"),
                    )),
                    Some((dom, cod)) if *dom == at => Ok(cod.clone()),
                    Some((dom, _)) => Err(err(
                        path,
                        format!("`{f}` expects an argument of type {dom} but `{a}` has type {at}"),
                    )),
                }
            }
            Term::Case {
                scrutinee,
                branches,
            } => {
                path.push("scrutinee");
                let st = scrutinee.type_at(path)?;
                path.pop();
                if !matches!(st, SimpleType::Tag(_)) {
                    return Err(err(
                        path,
                        format!("case on `{scrutinee}` of non-tagged type {st}"),
                    ));
                }
                let mut res: Option<SimpleType> = None;
                for b in branches.iter() {
                    path.push("branch");
                    let bt = b.type_at(path)?;
                    path.pop();
                    match &res {
                        Some(r) if *r != bt => {
                            return Err(err(path, format!("case branches disagree: {r} vs {bt}")))
                        }
                        _ => res = Some(bt),
                    }
                }
                res.ok_or_else(|| err(path, "case without branches".into()))
            }
        }
    }

    /// Free variables in first-occurrence order, left to right.
    pub fn free_vars(&self) -> Vec<(Name, SimpleType)> {
        let mut out: Vec<(Name, SimpleType)> = Vec::new();
        let mut bound: Vec<Name> = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut Vec<(Name, SimpleType)>) {
        match self {
            Term::Var { name, ty } => {
                if !bound.contains(name) && !out.iter().any(|(n, _)| n == name) {
                    out.push((name.clone(), ty.clone()));
                }
            }
            Term::Abs { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::Case {
                scrutinee,
                branches,
            } => {
                scrutinee.collect_free(bound, out);
                for b in branches.iter() {
                    b.collect_free(bound, out);
                }
            }
            _ => {}
        }
    }

    pub fn free_names(&self) -> HashSet<Name> {
        self.free_vars().into_iter().map(|(n, _)| n).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring in the term, bound or free.
    pub fn all_names(&self, out: &mut HashSet<Name>) {
        match self {
            Term::Var { name, .. } => {
                out.insert(name.clone());
            }
            Term::Abs { var, body, .. } => {
                out.insert(var.clone());
                body.all_names(out);
            }
            Term::App(f, a) => {
                f.all_names(out);
                a.all_names(out);
            }
            Term::Case {
                scrutinee,
                branches,
            } => {
                scrutinee.all_names(out);
                branches.iter().for_each(|b| b.all_names(out));
            }
            _ => {}
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Abs { body, .. } => 1 + body.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Case {
                scrutinee,
                branches,
            } => 1 + scrutinee.size() + branches.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn contains(&self, pred: &dyn Fn(&Term) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Term::Abs { body, .. } => body.contains(pred),
            Term::App(f, a) => f.contains(pred) || a.contains(pred),
            Term::Case {
                scrutinee,
                branches,
            } => scrutinee.contains(pred) || branches.iter().any(|b| b.contains(pred)),
            _ => false,
        }
    }

    pub fn count(&self, pred: &dyn Fn(&Term) -> bool) -> usize {
        let here = usize::from(pred(self));
        here + match self {
            Term::Abs { body, .. } => body.count(pred),
            Term::App(f, a) => f.count(pred) + a.count(pred),
            Term::Case {
                scrutinee,
                branches,
            } => scrutinee.count(pred) + branches.iter().map(|b| b.count(pred)).sum::<usize>(),
            _ => 0,
        }
    }

    /// Splits `h a1 ... an` into the head and its arguments.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Simultaneous capture-avoiding substitution.
    pub fn substitute(&self, subst: &BTreeMap<Name, Term>) -> Result<Term> {
        if subst.is_empty() {
            return Ok(self.clone());
        }
        let mut avoid = HashSet::new();
        for t in subst.values() {
            avoid.extend(t.free_names());
        }
        self.subst_rec(subst, &avoid)
    }

    pub fn substitute_one(&self, var: &str, by: &Term) -> Result<Term> {
        let mut m = BTreeMap::new();
        m.insert(Name::from(var), by.clone());
        self.substitute(&m)
    }

    fn subst_rec(&self, subst: &BTreeMap<Name, Term>, avoid: &HashSet<Name>) -> Result<Term> {
        match self {
            Term::Var { name, ty } => match subst.get(name) {
                Some(r) => {
                    let rt = r.type_of()?;
                    if rt != *ty {
                        return Err(Error::Type {
                            path: format!("substitution for {name}"),
                            msg: format!(
                                "variable has type {ty} but replacement `{r}` has type {rt}"
                            ),
                        });
                    }
                    Ok(r.clone())
                }
                None => Ok(self.clone()),
            },
            Term::Abs { var, var_ty, body } => {
                let mut inner: BTreeMap<Name, Term> = subst.clone();
                inner.remove(var);
                if inner.is_empty() {
                    return Ok(self.clone());
                }
                let body_free = body.free_names();
                inner.retain(|k, _| body_free.contains(k));
                if inner.is_empty() {
                    return Ok(self.clone());
                }
                let captured = inner.values().any(|t| t.free_names().contains(var));
                if captured || avoid.contains(var) {
                    let mut taken: HashSet<Name> = avoid.clone();
                    body.all_names(&mut taken);
                    let fresh = fresh_name(var, &taken);
                    inner.insert(
                        var.clone(),
                        Term::Var {
                            name: fresh.clone(),
                            ty: var_ty.clone(),
                        },
                    );
                    let mut avoid2 = avoid.clone();
                    avoid2.insert(fresh.clone());
                    let nb = body.subst_rec(&inner, &avoid2)?;
                    Ok(Term::Abs {
                        var: fresh,
                        var_ty: var_ty.clone(),
                        body: Arc::new(nb),
                    })
                } else {
                    let nb = body.subst_rec(&inner, avoid)?;
                    Ok(Term::Abs {
                        var: var.clone(),
                        var_ty: var_ty.clone(),
                        body: Arc::new(nb),
                    })
                }
            }
            Term::App(f, a) => Ok(Term::App(
                Arc::new(f.subst_rec(subst, avoid)?),
                Arc::new(a.subst_rec(subst, avoid)?),
            )),
            Term::Case {
                scrutinee,
                branches,
            } => {
                let s = scrutinee.subst_rec(subst, avoid)?;
                let bs = branches
                    .iter()
                    .map(|b| b.subst_rec(subst, avoid))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Term::case(s, bs))
            }
            _ => Ok(self.clone()),
        }
    }

    /// α-equivalence: bound names are irrelevant, free names and all types matter.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        fn go<'a>(a: &'a Term, b: &'a Term, sa: &mut Vec<&'a str>, sb: &mut Vec<&'a str>) -> bool {
            match (a, b) {
                (Term::Var { name: x, ty: tx }, Term::Var { name: y, ty: ty_ }) => {
                    let ix = sa.iter().rposition(|n| *n == &**x);
                    let iy = sb.iter().rposition(|n| *n == &**y);
                    tx == ty_
                        && match (ix, iy) {
                            (Some(i), Some(j)) => sa.len() - i == sb.len() - j,
                            (None, None) => x == y,
                            _ => false,
                        }
                }
                (
                    Term::Abs {
                        var: x,
                        var_ty: tx,
                        body: bx,
                    },
                    Term::Abs {
                        var: y,
                        var_ty: ty_,
                        body: by,
                    },
                ) => {
                    if tx != ty_ {
                        return false;
                    }
                    sa.push(x);
                    sb.push(y);
                    let r = go(bx, by, sa, sb);
                    sa.pop();
                    sb.pop();
                    r
                }
                (Term::App(f1, a1), Term::App(f2, a2)) => go(f1, f2, sa, sb) && go(a1, a2, sa, sb),
                (
                    Term::Case {
                        scrutinee: s1,
                        branches: b1,
                    },
                    Term::Case {
                        scrutinee: s2,
                        branches: b2,
                    },
                ) => {
                    b1.len() == b2.len()
                        && go(s1, s2, sa, sb)
                        && b1.iter().zip(b2.iter()).all(|(x, y)| go(x, y, sa, sb))
                }
                _ => a == b,
            }
        }
        go(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

/// `x'`, `x''`, ... until unused.
pub fn fresh_name(base: &str, taken: &HashSet<Name>) -> Name {
    let mut cand = format!("{base}'");
    while taken.contains(cand.as_str()) {
        cand.push('\'');
    }
    cand.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o() -> SimpleType {
        SimpleType::Base
    }

    fn oo() -> SimpleType {
        SimpleType::arrow(o(), o())
    }

    #[test]
    fn typing_examples() {
        assert_eq!(Term::var("x", o()).type_of().unwrap(), o());
        assert_eq!(
            Term::Fix(o()).type_of().unwrap(),
            SimpleType::arrow(oo(), o())
        );
        let bad = Term::app(Term::constant("c", o()), Term::constant("c", o()));
        let e = bad.type_of().unwrap_err();
        assert!(e.to_string().contains("applying non-function"), "{e}");
    }

    #[test]
    fn free_vars_in_occurrence_order() {
        let id = Term::abs("x", o(), Term::var("x", o()));
        assert!(id.free_vars().is_empty());
        let t = Term::app(Term::var("f", oo()), Term::var("x", o()));
        let fv: Vec<_> = t
            .free_vars()
            .into_iter()
            .map(|(n, t)| (n.to_string(), t))
            .collect();
        assert_eq!(fv, vec![("f".to_string(), oo()), ("x".to_string(), o())]);
        let body = Term::apps(
            Term::constant("a", SimpleType::binary()),
            [
                Term::var("x", o()),
                Term::app(Term::var("F", oo()), Term::var("x", o())),
            ],
        );
        let m = Term::abs("F", oo(), Term::abs("x", o(), body));
        let closed = Term::app(Term::fix_app(m).unwrap(), Term::constant("c", o()));
        assert!(closed.free_vars().is_empty());
    }

    #[test]
    fn substitution_examples() {
        let c = Term::constant("c", o());
        assert_eq!(Term::var("x", o()).substitute_one("x", &c).unwrap(), c);

        let t = Term::abs("y", o(), Term::var("x", o()));
        let r = t.substitute_one("x", &Term::var("y", o())).unwrap();
        match &r {
            Term::Abs { var, body, .. } => {
                assert_ne!(&**var, "y");
                assert_eq!(**body, Term::var("y", o()));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(r.alpha_eq(&Term::abs("z", o(), Term::var("y", o()))));

        let a = Term::constant("a", SimpleType::binary());
        let axx = Term::apps(a.clone(), [Term::var("x", o()), Term::var("x", o())]);
        assert_eq!(
            axx.substitute_one("x", &c).unwrap(),
            Term::apps(a, [c.clone(), c])
        );

        let mismatch = Term::var("x", o()).substitute_one("x", &Term::var("f", oo()));
        assert!(mismatch.is_err());
    }

    #[test]
    fn alpha_equivalence() {
        let a = Term::abs("x", o(), Term::var("x", o()));
        let b = Term::abs("y", o(), Term::var("y", o()));
        assert!(a.alpha_eq(&b));
        let c = Term::abs("y", o(), Term::var("x", o()));
        assert!(!a.alpha_eq(&c));
        let d = Term::abs("x", oo(), Term::var("x", oo()));
        assert!(!a.alpha_eq(&d));
    }
}
