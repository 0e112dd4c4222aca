//! Reflection: terms whose Böhm trees carry the model value of every node.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use crate::domains::{apply, eval, Model, SemValue};
use crate::error::{Error, Result};
use crate::reduction::{expand_bohm, tag_sizes};
use crate::syntax::{fresh_name, Name, SimpleType, Term};
use crate::tree::LabeledTree;

/// `α•`: atomic types are kept, `(α -> β)• = α• -> [α] -> β•`.
pub fn type_bullet(ty: &SimpleType) -> SimpleType {
    match ty.split_arrow() {
        None => ty.clone(),
        Some((a, b)) => {
            SimpleType::arrows([type_bullet(a), SimpleType::tag(a.clone())], type_bullet(b))
        }
    }
}

/// `rBT(t)↓depth`: the Böhm tree prefix of `t` with every constant node
/// annotated by the index in the base domain of `m` of its subterm's value.
pub fn rbt_truncate(m: &dyn Model, t: &Term, depth: usize) -> Result<LabeledTree> {
    let base = m.domain(&SimpleType::Base)?;
    expand_bohm(t, depth, &mut |_, sub| {
        let v = eval(sub, m, &[])?;
        Ok(Some(index_in(&base, &v, &SimpleType::Base)?))
    })
}

fn index_in(dom: &crate::domains::FinPoset, v: &SemValue, ty: &SimpleType) -> Result<usize> {
    dom.index_of(v).ok_or_else(|| {
        Error::Internal(format!(
            "value {v:?} is not an element of the model at {ty}"
        ))
    })
}

/// Options of the reflection translations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReflectOptions {
    /// Emit `Ω` for every subterm whose value denotes divergence.
    pub omega_shortcut: bool,
}

/// A reflected term and the sizes of the tagged types it uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reflection {
    pub term: Term,
    pub tags: BTreeMap<SimpleType, usize>,
}

struct Translator<'m> {
    model: &'m dyn Model,
    opts: ReflectOptions,
    taken: HashSet<Name>,
    tags: BTreeMap<SimpleType, usize>,
}

type Valuation = Vec<(Name, SemValue)>;

impl<'m> Translator<'m> {
    fn new(model: &'m dyn Model, t: &Term, opts: ReflectOptions) -> Result<Self> {
        if opts.omega_shortcut && !model.observes_divergence() {
            return Err(Error::Uninterpreted(format!(
                "the Ω shortcut needs a model observing divergence, not {}",
                model.name()
            )));
        }
        let mut taken = HashSet::new();
        t.all_names(&mut taken);
        Ok(Translator {
            model,
            opts,
            taken,
            tags: BTreeMap::new(),
        })
    }

    fn fresh(&mut self, base: &str) -> Name {
        let n = fresh_name(base, &self.taken);
        self.taken.insert(n.clone());
        n
    }

    fn value(&self, t: &Term, env: &Valuation) -> Result<SemValue> {
        eval(t, self.model, env)
    }

    /// The tagged element naming `v` at `ty`.
    fn elem(&mut self, ty: &SimpleType, v: &SemValue) -> Result<Term> {
        let dom = self.model.domain(ty)?;
        let i = index_in(&dom, v, ty)?;
        self.tags.insert(ty.clone(), dom.len());
        Ok(Term::elem(ty.clone(), i))
    }

    fn base_index(&self, v: &SemValue) -> Result<usize> {
        index_in(
            &*self.model.domain(&SimpleType::Base)?,
            v,
            &SimpleType::Base,
        )
    }

    fn shortcut(&self, t: &Term, env: &Valuation) -> Result<Option<Term>> {
        if !self.opts.omega_shortcut {
            return Ok(None);
        }
        let ty = t.type_of()?;
        let v = self.value(t, env)?;
        Ok(self
            .model
            .denotes_divergence(&ty, &v)?
            .then(|| Term::Omega(type_bullet(&ty))))
    }

    /// `λx:α•. λy:[α]. case y { d -> body(d) }` over the elements of `α`.
    fn case_abs(
        &mut self,
        x: &Name,
        alpha: &SimpleType,
        body: &mut dyn FnMut(&mut Self, &SemValue) -> Result<Term>,
    ) -> Result<Term> {
        let dom = self.model.domain(alpha)?;
        self.tags.insert(alpha.clone(), dom.len());
        let y = self.fresh("y");
        let branches = dom
            .elements()
            .iter()
            .map(|d| body(self, d))
            .collect::<Result<Vec<_>>>()?;
        let tag = SimpleType::tag(alpha.clone());
        Ok(Term::abs(
            x,
            type_bullet(alpha),
            Term::abs(&y, tag.clone(), Term::case(Term::var(&y, tag), branches)),
        ))
    }

    fn reflect(&mut self, t: &Term, env: &Valuation) -> Result<Term> {
        if let Some(o) = self.shortcut(t, env)? {
            return Ok(o);
        }
        match t {
            Term::Const { name, ty, .. } => self.constant(name, ty, None),
            Term::Var { name, ty } => Ok(Term::var(name, type_bullet(ty))),
            Term::Omega(ty) => Ok(Term::Omega(type_bullet(ty))),
            Term::LittleOmega(ty) => Ok(Term::LittleOmega(type_bullet(ty))),
            Term::Abs { var, var_ty, body } => self.case_abs(var, var_ty, &mut |s, d| {
                let mut env2 = env.clone();
                env2.push((var.clone(), d.clone()));
                s.reflect(body, &env2)
            }),
            Term::Fix(alpha) => {
                let f = self.fresh("f");
                let eta = Term::abs(&f, SimpleType::arrow(alpha.clone(), alpha.clone()), {
                    Term::app(
                        t.clone(),
                        Term::var(&f, SimpleType::arrow(alpha.clone(), alpha.clone())),
                    )
                });
                self.reflect(&eta, env)
            }
            Term::App(f, m) => {
                if let Term::Fix(alpha) = &**f {
                    let k = self.value(t, env)?;
                    let k = self.elem(alpha, &k)?;
                    let inner = self.reflect(m, env)?;
                    return self.fix_clause(alpha, inner, k);
                }
                let arg_ty = m.type_of()?;
                let v = self.value(m, env)?;
                let tag = self.elem(&arg_ty, &v)?;
                let fr = self.reflect(f, env)?;
                let mr = self.reflect(m, env)?;
                Ok(Term::apps(fr, [mr, tag]))
            }
            Term::Elem { .. } | Term::Case { .. } => Err(Error::Internal(format!(
                "reflection of an extended term `{t}`"
            ))),
        }
    }

    /// `Y(λx:α•. inner x k)`.
    fn fix_clause(&mut self, alpha: &SimpleType, inner: Term, k: Term) -> Result<Term> {
        let ab = type_bullet(alpha);
        let x = self.fresh("x");
        let body = Term::apps(inner, [Term::var(&x, ab.clone()), k]);
        Ok(Term::app(Term::Fix(ab.clone()), Term::abs(&x, ab, body)))
    }

    /// Translation of a constant; `known` holds the argument values of a binary
    /// constant when they are statically known.
    fn constant(
        &mut self,
        name: &Name,
        ty: &SimpleType,
        known: Option<(&SemValue, &SemValue)>,
    ) -> Result<Term> {
        let m = self.model;
        if ty.is_base() {
            let v = m.constant(name, ty)?;
            return Ok(Term::annotated(name, ty.clone(), self.base_index(&v)?));
        }
        if *ty != SimpleType::binary() {
            return Err(Error::NotTreeSignature(format!("{name} : {ty}")));
        }
        let o = SimpleType::Base;
        let base = m.domain(&o)?;
        self.tags.insert(o.clone(), base.len());
        let rho = m.constant(name, ty)?;
        let x1 = self.fresh("x1");
        let y1 = self.fresh("y1");
        let x2 = self.fresh("x2");
        let y2 = self.fresh("y2");
        let tag = SimpleType::tag(o.clone());
        let leaf = |d1: &SemValue, d2: &SemValue| -> Result<Term> {
            let v = apply(&base, &apply(&base, &rho, d1)?, d2)?;
            let k = index_in(&base, &v, &o)?;
            Ok(Term::apps(
                Term::annotated(name, ty.clone(), k),
                [Term::var(&x1, o.clone()), Term::var(&x2, o.clone())],
            ))
        };
        let body = match known {
            Some((d1, d2)) => leaf(d1, d2)?,
            None => {
                let mut outer = Vec::with_capacity(base.len());
                for d1 in base.elements() {
                    let inner = base
                        .elements()
                        .iter()
                        .map(|d2| leaf(d1, d2))
                        .collect::<Result<Vec<_>>>()?;
                    outer.push(Term::case(Term::var(&y2, tag.clone()), inner));
                }
                Term::case(Term::var(&y1, tag.clone()), outer)
            }
        };
        Ok(Term::abs(
            &x1,
            o.clone(),
            Term::abs(
                &y1,
                tag.clone(),
                Term::abs(&x2, o.clone(), Term::abs(&y2, tag, body)),
            ),
        ))
    }

    fn reflect_opt(&mut self, t: &Term, env: &Valuation, stack: &[SemValue]) -> Result<Term> {
        if let Some(o) = self.shortcut(t, env)? {
            return Ok(o);
        }
        match t {
            Term::Const { name, ty, .. } => match (ty.arity(), stack) {
                (0, []) => self.constant(name, ty, None),
                (2, [d1, d2]) => self.constant(name, ty, Some((d1, d2))),
                _ => Err(Error::NotEtaLong(format!(
                    "`{name}` applied to {} arguments",
                    stack.len()
                ))),
            },
            Term::Var { name, ty } => Ok(Term::var(name, type_bullet(ty))),
            Term::Omega(ty) => Ok(Term::Omega(type_bullet(ty))),
            Term::LittleOmega(ty) => Ok(Term::LittleOmega(type_bullet(ty))),
            Term::Abs { var, var_ty, body } => match stack.split_first() {
                Some((d, rest)) => {
                    let dom = self.model.domain(var_ty)?;
                    self.tags.insert(var_ty.clone(), dom.len());
                    let y = self.fresh("y");
                    let mut env2 = env.clone();
                    env2.push((var.clone(), d.clone()));
                    let b = self.reflect_opt(body, &env2, rest)?;
                    Ok(Term::abs(
                        var,
                        type_bullet(var_ty),
                        Term::abs(&y, SimpleType::tag(var_ty.clone()), b),
                    ))
                }
                None => self.case_abs(var, var_ty, &mut |s, d| {
                    let mut env2 = env.clone();
                    env2.push((var.clone(), d.clone()));
                    s.reflect_opt(body, &env2, &[])
                }),
            },
            Term::Fix(_) => Err(Error::NotEtaLong(format!("unapplied `{t}`"))),
            Term::App(f, m) => {
                if let Term::Fix(alpha) = &**f {
                    let v = self.value(t, env)?;
                    let k = self.elem(alpha, &v)?;
                    let inner = self.reflect_opt(m, env, &[v])?;
                    return self.fix_clause(alpha, inner, k);
                }
                let arg_ty = m.type_of()?;
                let v = self.value(m, env)?;
                let tag = self.elem(&arg_ty, &v)?;
                let mut s2 = Vec::with_capacity(stack.len() + 1);
                s2.push(v);
                s2.extend_from_slice(stack);
                let fr = self.reflect_opt(f, env, &s2)?;
                let mr = self.reflect_opt(m, env, &[])?;
                Ok(Term::apps(fr, [mr, tag]))
            }
            Term::Elem { .. } | Term::Case { .. } => Err(Error::Internal(format!(
                "reflection of an extended term `{t}`"
            ))),
        }
    }
}

/// `⟦t, υ⟧`: the reflection of `t` under the valuation `env` of its free
/// variables. For a closed `t : o`, `BT(reflect(m, t, []))` is `rBT(t)`.
pub fn reflect(m: &dyn Model, t: &Term, env: &[(Name, SemValue)]) -> Result<Term> {
    Ok(reflect_with(m, t, env, ReflectOptions::default())?.term)
}

pub fn reflect_with(
    m: &dyn Model,
    t: &Term,
    env: &[(Name, SemValue)],
    opts: ReflectOptions,
) -> Result<Reflection> {
    t.type_of()?;
    let mut tr = Translator::new(m, t, opts)?;
    let term = tr.reflect(t, &env.to_vec())?;
    Ok(Reflection {
        term,
        tags: tr.tags,
    })
}

/// The translation parametrised by a stack of argument values: `case` is only
/// emitted where argument values are not statically known. `t` must be η-long
/// for constants (see [`eta_long_constants`]).
pub fn reflect_opt(
    m: &dyn Model,
    t: &Term,
    env: &[(Name, SemValue)],
    stack: &[SemValue],
    opts: ReflectOptions,
) -> Result<Reflection> {
    t.type_of()?;
    let mut tr = Translator::new(m, t, opts)?;
    let term = tr.reflect_opt(t, &env.to_vec(), stack)?;
    Ok(Reflection {
        term,
        tags: tr.tags,
    })
}

/// η-expands every occurrence of a constant or of `Y` that is not applied to
/// all of its arguments.
pub fn eta_long_constants(t: &Term) -> Result<Term> {
    let mut taken = HashSet::new();
    t.all_names(&mut taken);
    eta_go(t, &mut taken)
}

fn eta_go(t: &Term, taken: &mut HashSet<Name>) -> Result<Term> {
    let (head, args) = t.spine();
    let args = args
        .into_iter()
        .map(|a| eta_go(a, taken))
        .collect::<Result<Vec<_>>>()?;
    let (head, needed) = match head {
        Term::Const { ty, .. } => (head.clone(), ty.arity()),
        Term::Fix(_) => (head.clone(), 1),
        Term::Abs { var, var_ty, body } => (
            Term::Abs {
                var: var.clone(),
                var_ty: var_ty.clone(),
                body: Arc::new(eta_go(body, taken)?),
            },
            0,
        ),
        Term::Case {
            scrutinee,
            branches,
        } => (
            Term::Case {
                scrutinee: Arc::new(eta_go(scrutinee, taken)?),
                branches: branches
                    .iter()
                    .map(|b| eta_go(b, taken))
                    .collect::<Result<Vec<_>>>()?
                    .into(),
            },
            0,
        ),
        other => (other.clone(), 0),
    };
    if args.len() >= needed {
        return Ok(Term::apps(head, args));
    }
    let ty = Term::apps(head.clone(), args.clone()).type_of()?;
    let (doms, _) = ty.uncurry();
    let missing: Vec<(Name, SimpleType)> = doms[..needed - args.len()]
        .iter()
        .map(|d| {
            let n = fresh_name("z", taken);
            taken.insert(n.clone());
            (n, (*d).clone())
        })
        .collect();
    let full = Term::apps(
        Term::apps(head, args),
        missing.iter().map(|(n, d)| Term::var(n, d.clone())),
    );
    let full = eta_go(&full, taken)?;
    Ok(missing
        .into_iter()
        .rev()
        .fold(full, |b, (n, d)| Term::abs(&n, d, b)))
}

/// Replaces tagged types by `o^k -> o`, elements by projections and `case` by
/// application of the scrutinee to the η-expanded branches.
pub fn desugar_case(t: &Term) -> Result<Term> {
    let sizes = tag_sizes(t);
    let mut taken = HashSet::new();
    t.all_names(&mut taken);
    desugar_go(t, &sizes, &mut taken)
}

fn desugar_type(ty: &SimpleType, sizes: &BTreeMap<SimpleType, usize>) -> SimpleType {
    match ty {
        SimpleType::Base => SimpleType::Base,
        SimpleType::Tag(of) => {
            let k = sizes.get(&**of).copied().unwrap_or(1);
            SimpleType::arrows(vec![SimpleType::Base; k], SimpleType::Base)
        }
        SimpleType::Arrow(a, b) => {
            SimpleType::arrow(desugar_type(a, sizes), desugar_type(b, sizes))
        }
    }
}

fn desugar_go(
    t: &Term,
    sizes: &BTreeMap<SimpleType, usize>,
    taken: &mut HashSet<Name>,
) -> Result<Term> {
    let fresh = |base: &str, taken: &mut HashSet<Name>| {
        let n = fresh_name(base, taken);
        taken.insert(n.clone());
        n
    };
    Ok(match t {
        Term::Const { .. } => t.clone(),
        Term::Var { name, ty } => Term::var(name, desugar_type(ty, sizes)),
        Term::Fix(ty) => Term::Fix(desugar_type(ty, sizes)),
        Term::Omega(ty) => Term::Omega(desugar_type(ty, sizes)),
        Term::LittleOmega(ty) => Term::LittleOmega(desugar_type(ty, sizes)),
        Term::Abs { var, var_ty, body } => Term::abs(
            var,
            desugar_type(var_ty, sizes),
            desugar_go(body, sizes, taken)?,
        ),
        Term::App(f, a) => Term::app(desugar_go(f, sizes, taken)?, desugar_go(a, sizes, taken)?),
        Term::Elem { tag, index } => {
            let k = sizes.get(tag).copied().unwrap_or(index + 1);
            let xs: Vec<Name> = (0..k).map(|_| fresh("p", taken)).collect();
            let body = Term::var(&xs[*index], SimpleType::Base);
            xs.iter()
                .rev()
                .fold(body, |b, x| Term::abs(x, SimpleType::Base, b))
        }
        Term::Case {
            scrutinee,
            branches,
        } => {
            let ty = desugar_type(&t.type_of()?, sizes);
            let (doms, _) = ty.uncurry();
            let doms: Vec<SimpleType> = doms.into_iter().cloned().collect();
            let ys: Vec<Name> = doms.iter().map(|_| fresh("w", taken)).collect();
            let yvars = || ys.iter().zip(&doms).map(|(y, d)| Term::var(y, d.clone()));
            let s = desugar_go(scrutinee, sizes, taken)?;
            let mut args = Vec::with_capacity(branches.len());
            for b in branches.iter() {
                args.push(Term::apps(desugar_go(b, sizes, taken)?, yvars()));
            }
            let body = Term::apps(s, args);
            ys.iter()
                .zip(&doms)
                .rev()
                .fold(body, |b, (y, d)| Term::abs(y, d.clone(), b))
        }
    })
}

/// Legend for annotations: every base element, then the elements of every
/// tagged type in `tags`.
pub fn legend(m: &dyn Model, tags: &BTreeMap<SimpleType, usize>) -> Result<String> {
    let mut s = String::from("legend:\n");
    let base = m.domain(&SimpleType::Base)?;
    for (i, v) in base.elements().iter().enumerate() {
        s.push_str(&format!("  #{i} = {}\n", m.describe(&SimpleType::Base, v)));
    }
    for ty in tags.keys().filter(|t| !t.is_base()) {
        let dom = m.domain(ty)?;
        for i in 0..dom.len() {
            s.push_str(&format!("  #{i}:[{ty}] = {}\n", dom.label(i)));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{ExampleAutomaton, TacAutomaton};
    use crate::gfp::build_gfp;
    use crate::kmodel::KModel;
    use crate::reduction::bohm_truncate;
    use crate::syntax::{parse_term, parse_type, Signature};

    fn sig() -> Signature {
        Signature::with_tree(&[("c", 0), ("a", 2)]).unwrap()
    }

    fn t(s: &str) -> Term {
        parse_term(s, &sig()).unwrap()
    }

    fn a1() -> TacAutomaton {
        TacAutomaton::example(ExampleAutomaton::NoOmega, &sig()).unwrap()
    }

    #[test]
    fn bullet_types() {
        let b = |s: &str| type_bullet(&parse_type(s).unwrap()).to_string();
        assert_eq!(b("o"), "o");
        assert_eq!(b("o -> o"), "o -> [o] -> o");
        assert_eq!(b("(o -> o) -> o"), "(o -> [o] -> o) -> [o -> o] -> o");
    }

    #[test]
    fn basic_clauses() {
        let m = build_gfp(&a1().omega_blind_variant());
        assert_eq!(reflect(&m, &t("c"), &[]).unwrap().to_string(), "c^{#1}");
        let id = reflect(&m, &t("\\x:o. x"), &[]).unwrap();
        assert_eq!(
            id.to_string(),
            "\\x:o y':[o]. case y' { #0 -> x | #1 -> x }"
        );
        assert_eq!(id.type_of().unwrap().to_string(), "o -> [o] -> o");
    }

    #[test]
    fn reflection_generates_rbt() {
        let gfp = build_gfp(&a1().omega_blind_variant());
        let k = KModel::new(&a1());
        let terms = [
            "c",
            "a c c",
            "a c (Y (\\x:o. x))",
            "Y (\\F:o -> o. \\x:o. a x (F x)) c",
            "(\\f:o -> o. f (f c)) (\\x:o. a x c)",
        ];
        for m in [&gfp as &dyn Model, &k] {
            for s in terms {
                let src = t(s);
                let r = reflect(m, &src, &[]).unwrap();
                let opt = reflect_opt(
                    m,
                    &eta_long_constants(&src).unwrap(),
                    &[],
                    &[],
                    ReflectOptions::default(),
                )
                .unwrap()
                .term;
                for n in 0..=4 {
                    let want = rbt_truncate(m, &src, n).unwrap();
                    assert_eq!(
                        bohm_truncate(&r, n).unwrap(),
                        want,
                        "{s} at {n} in {}",
                        m.name()
                    );
                    assert_eq!(
                        bohm_truncate(&opt, n).unwrap(),
                        want,
                        "opt {s} at {n} in {}",
                        m.name()
                    );
                }
            }
        }
    }

    #[test]
    fn optimised_is_smaller() {
        let m = KModel::new(&a1());
        let src = t("a c c");
        let r = reflect(&m, &src, &[]).unwrap();
        let o = reflect_opt(&m, &src, &[], &[], ReflectOptions::default())
            .unwrap()
            .term;
        assert!(o.size() < r.size());
        assert_eq!(o.count(&|s| matches!(s, Term::Case { .. })), 0);
    }

    #[test]
    fn desugared_case_selects_branch() {
        let m = KModel::new(&a1());
        let r = reflect(&m, &t("(\\x:o. x) c"), &[]).unwrap();
        let d = desugar_case(&r).unwrap();
        assert!(!d.type_of().unwrap().contains_tag());
        assert_eq!(bohm_truncate(&d, 3).unwrap(), bohm_truncate(&r, 3).unwrap());
    }
}
