use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::poset::{mono_space, FinPoset, SemValue};
use crate::error::{Error, Result};
use crate::syntax::SimpleType;

/// A finite model of the λY-calculus: domains at each type, an interpretation
/// of constants, of `ω`, `Ω` and of the fixpoint combinator.
pub trait Model: Send + Sync {
    fn name(&self) -> &str;

    /// The enumerated domain at `ty`.
    fn domain(&self, ty: &SimpleType) -> Result<Arc<FinPoset>>;

    fn constant(&self, name: &str, ty: &SimpleType) -> Result<SemValue>;

    /// Interpretation of `Ω` at `ty`.
    fn omega(&self, ty: &SimpleType) -> Result<SemValue>;

    /// Interpretation of the cut marker `ω` at `ty`.
    fn little_omega(&self, ty: &SimpleType) -> Result<SemValue>;

    /// The fixpoint at `ty` of the function given by `f`.
    fn fix(
        &self,
        ty: &SimpleType,
        f: &mut dyn FnMut(&SemValue) -> Result<SemValue>,
    ) -> Result<SemValue>;

    /// The value of the tagged element `#index : [tag]`.
    fn element(&self, tag: &SimpleType, _index: usize) -> Result<SemValue> {
        Err(Error::Uninterpreted(format!(
            "#_:[{tag}] in model {}",
            self.name()
        )))
    }

    /// Which branch a `case` on `scrutinee` selects; `None` when the scrutinee
    /// denotes divergence and so does the whole `case`.
    fn case_branch(&self, tag: &SimpleType, _scrutinee: &SemValue) -> Result<Option<usize>> {
        Err(Error::Uninterpreted(format!(
            "case on [{tag}] in model {}",
            self.name()
        )))
    }

    /// Whether the model distinguishes divergence from other behaviour.
    fn observes_divergence(&self) -> bool {
        false
    }

    /// Whether `v` is the value of terms without head normal form. Only models
    /// that observe divergence answer.
    fn denotes_divergence(&self, ty: &SimpleType, _v: &SemValue) -> Result<bool> {
        Err(Error::Uninterpreted(format!(
            "divergence at {ty} is not observable in model {}",
            self.name()
        )))
    }

    /// Hook called on every function table built by the evaluator.
    fn check_member(&self, _ty: &SimpleType, _v: &SemValue) -> Result<()> {
        Ok(())
    }

    /// Human-readable rendering of a value.
    fn describe(&self, ty: &SimpleType, v: &SemValue) -> String {
        match self
            .domain(ty)
            .ok()
            .and_then(|d| d.index_of(v).map(|i| (d, i)))
        {
            Some((d, i)) if d.is_base() => d.label(i),
            Some((_, i)) => format!("#{i}"),
            None => format!("{v:?}"),
        }
    }
}

/// Thread-safe per-type cache of domains; the first completed build wins.
#[derive(Default)]
pub struct DomainCache {
    map: Mutex<HashMap<SimpleType, Arc<FinPoset>>>,
}

impl DomainCache {
    pub fn get(&self, ty: &SimpleType) -> Option<Arc<FinPoset>> {
        self.map
            .lock()
            .expect("domain cache poisoned")
            .get(ty)
            .cloned()
    }

    pub fn get_or_build(
        &self,
        ty: &SimpleType,
        build: impl FnOnce() -> Result<FinPoset>,
    ) -> Result<Arc<FinPoset>> {
        if let Some(d) = self.get(ty) {
            return Ok(d);
        }
        // Built outside the lock so that recursive builds of sub-domains work.
        let built = Arc::new(build()?);
        let mut map = self.map.lock().expect("domain cache poisoned");
        Ok(map.entry(ty.clone()).or_insert(built).clone())
    }
}

/// Full monotone function space at `ty`, with atomic types provided by `base`.
pub fn full_domain(
    cache: &DomainCache,
    ty: &SimpleType,
    cap: usize,
    base: &dyn Fn(&SimpleType) -> Result<FinPoset>,
) -> Result<Arc<FinPoset>> {
    cache.get_or_build(ty, || match ty.split_arrow() {
        None => base(ty),
        Some((a, b)) => {
            let dom = full_domain(cache, a, cap, base)?;
            let cod = full_domain(cache, b, cap, base)?;
            mono_space(dom, cod, cap)
        }
    })
}

/// Builds the table of a function of any arity from its action on fully
/// applied arguments.
pub fn tabulate(
    model: &dyn Model,
    ty: &SimpleType,
    f: &mut dyn FnMut(&[SemValue]) -> Result<SemValue>,
) -> Result<SemValue> {
    fn go(
        model: &dyn Model,
        ty: &SimpleType,
        args: &mut Vec<SemValue>,
        f: &mut dyn FnMut(&[SemValue]) -> Result<SemValue>,
    ) -> Result<SemValue> {
        match ty.split_arrow() {
            None => f(args),
            Some((a, b)) => {
                let dom = model.domain(a)?;
                let mut out = Vec::with_capacity(dom.len());
                for d in dom.elements() {
                    args.push(d.clone());
                    out.push(go(model, b, args, f)?);
                    args.pop();
                }
                Ok(SemValue::Fun(out.into()))
            }
        }
    }
    go(model, ty, &mut Vec::new(), f)
}

/// The function at `ty` that is constantly `v` after all its arguments.
pub fn constant_function(model: &dyn Model, ty: &SimpleType, v: &SemValue) -> Result<SemValue> {
    match ty.split_arrow() {
        None => Ok(v.clone()),
        Some((a, b)) => {
            let n = model.domain(a)?.len();
            Ok(SemValue::constant(n, constant_function(model, b, v)?))
        }
    }
}

/// Applies a table to an argument, locating the argument in `dom`.
pub fn apply(dom: &FinPoset, f: &SemValue, x: &SemValue) -> Result<SemValue> {
    let t = f
        .table()
        .ok_or_else(|| Error::Internal("applying a base value".into()))?;
    let i = dom.index_of(x).ok_or_else(|| {
        Error::Internal(format!(
            "argument {x:?} is not an element of the domain at {}",
            dom.ty()
        ))
    })?;
    Ok(t[i].clone())
}

/// Iterates `f` from `start` until it stabilises.
pub fn iterate_to_fixpoint(
    start: SemValue,
    f: &mut dyn FnMut(&SemValue) -> Result<SemValue>,
    bound: usize,
) -> Result<SemValue> {
    let mut x = start;
    for _ in 0..=bound {
        let y = f(&x)?;
        if y == x {
            return Ok(x);
        }
        x = y;
    }
    Err(Error::Internal(format!(
        "fixpoint iteration did not stabilise within {bound} steps"
    )))
}

/// Upper bound on the length of chains in the domain of `ty`, computed from the
/// argument domains without enumerating the domain itself.
pub fn chain_bound(model: &dyn Model, ty: &SimpleType) -> Result<usize> {
    match ty.split_arrow() {
        None => Ok(model.domain(ty)?.len()),
        Some((a, b)) => Ok(model
            .domain(a)?
            .len()
            .saturating_mul(chain_bound(model, b)?)),
    }
}

/// Least fixpoint of `f : α -> α` by iteration from the bottom of `dom`.
pub fn kleene_lfp(f: &SemValue, dom: &FinPoset) -> Result<SemValue> {
    let b = dom
        .bottom()
        .ok_or_else(|| Error::Internal(format!("no bottom at {}", dom.ty())))?;
    iterate_to_fixpoint(dom.get(b).clone(), &mut |x| apply(dom, f, x), dom.len())
}

/// Greatest fixpoint of `f : α -> α` by iteration from the top of `dom`.
pub fn kleene_gfp(f: &SemValue, dom: &FinPoset) -> Result<SemValue> {
    let t = dom
        .top()
        .ok_or_else(|| Error::Internal(format!("no top at {}", dom.ty())))?;
    iterate_to_fixpoint(dom.get(t).clone(), &mut |x| apply(dom, f, x), dom.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::poset::DEFAULT_CAP;

    fn two() -> Arc<FinPoset> {
        Arc::new(FinPoset::chain(
            SimpleType::Base,
            vec!["0".into(), "1".into()],
        ))
    }

    #[test]
    fn fixpoints_on_the_two_chain() {
        let d = two();
        let id = SemValue::Fun(vec![SemValue::Base(0), SemValue::Base(1)].into());
        let top = SemValue::constant(2, SemValue::Base(1));
        let bot = SemValue::constant(2, SemValue::Base(0));
        assert_eq!(kleene_lfp(&id, &d).unwrap(), SemValue::Base(0));
        assert_eq!(kleene_gfp(&id, &d).unwrap(), SemValue::Base(1));
        assert_eq!(kleene_lfp(&top, &d).unwrap(), SemValue::Base(1));
        assert_eq!(kleene_gfp(&bot, &d).unwrap(), SemValue::Base(0));
    }

    #[test]
    fn join_and_meet_with_a_point() {
        // Powerset of {1,2}: x ∨ a and x ∧ a for a = {1}.
        let p = FinPoset::base(
            SimpleType::Base,
            (0..4).map(|i| i.to_string()).collect(),
            |i, j| i & !j == 0,
        )
        .unwrap();
        let a = 1u32;
        let join_a = SemValue::Fun((0..4u32).map(|x| SemValue::Base(x | a)).collect());
        let meet_a = SemValue::Fun((0..4u32).map(|x| SemValue::Base(x & a)).collect());
        assert_eq!(kleene_lfp(&join_a, &p).unwrap(), SemValue::Base(a));
        assert_eq!(kleene_gfp(&meet_a, &p).unwrap(), SemValue::Base(a));
    }

    #[test]
    fn full_domain_is_cached() {
        let cache = DomainCache::default();
        let base = |_: &SimpleType| {
            Ok(FinPoset::chain(
                SimpleType::Base,
                vec!["0".into(), "1".into()],
            ))
        };
        let oo = SimpleType::arrow(SimpleType::Base, SimpleType::Base);
        let a = full_domain(&cache, &oo, DEFAULT_CAP, &base).unwrap();
        let b = full_domain(&cache, &oo, DEFAULT_CAP, &base).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.len(), 3);
    }
}
