//! GFP models: finite models interpreting `Y` as the greatest fixpoint, the
//! model built from a TAC automaton, and the dual automata of a model.

use std::sync::Arc;

use crate::automata::{StateSet, TacAutomaton, MAX_STATES, OMEGA};
use crate::domains::{
    apply, chain_bound, constant_function, eval_closed, full_domain, iterate_to_fixpoint, tabulate,
    DomainCache, FinPoset, Model, SemValue, DEFAULT_CAP,
};
use crate::error::{Error, Result};
use crate::kmodel::check_closed_base;
use crate::syntax::{Signature, SimpleType, Term};

/// The GFP model over the powerset of the states of an automaton. The base
/// element with index `i` is the state set with bit mask `i`.
pub struct GfpModel {
    aut: TacAutomaton,
    cache: DomainCache,
    cap: usize,
}

/// Verdict of a model check together with the value of the term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checked {
    pub accepted: bool,
    pub value: SemValue,
    pub rendered: String,
}

impl GfpModel {
    pub fn new(aut: &TacAutomaton) -> Self {
        GfpModel {
            aut: aut.clone(),
            cache: DomainCache::default(),
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn automaton(&self) -> &TacAutomaton {
        &self.aut
    }

    pub fn base_value(&self, set: StateSet) -> SemValue {
        SemValue::Base(set as u32)
    }

    pub fn state_set(&self, v: &SemValue) -> Result<StateSet> {
        v.base_index()
            .map(|i| i as StateSet)
            .ok_or_else(|| Error::Internal(format!("{v:?} is not a state set")))
    }

    fn top(&self) -> SemValue {
        self.base_value(self.aut.all_states())
    }

    fn base(&self, ty: &SimpleType) -> Result<FinPoset> {
        if !ty.is_base() {
            return Err(Error::Uninterpreted(format!(
                "tagged type {ty} in a GFP model"
            )));
        }
        let labels = (0..1u64 << self.aut.n_states())
            .map(|s| self.aut.format_set(s))
            .collect();
        FinPoset::base(SimpleType::Base, labels, |i, j| i & !j == 0)
    }
}

/// `build_gfp`: the GFP model recognising the language of an `Ω`-blind automaton.
pub fn build_gfp(aut: &TacAutomaton) -> GfpModel {
    GfpModel::new(aut)
}

impl Model for GfpModel {
    fn name(&self) -> &str {
        "GFP"
    }

    fn domain(&self, ty: &SimpleType) -> Result<Arc<FinPoset>> {
        full_domain(&self.cache, ty, self.cap, &|t| self.base(t))
    }

    fn constant(&self, name: &str, ty: &SimpleType) -> Result<SemValue> {
        if ty.is_base() {
            return Ok(self.base_value(self.aut.leaf_states(name)?));
        }
        if *ty != SimpleType::binary() {
            return Err(Error::NotTreeSignature(format!("{name} : {ty}")));
        }
        self.aut.delta2(0, name)?;
        tabulate(self, ty, &mut |args| {
            let l = self.state_set(&args[0])?;
            let r = self.state_set(&args[1])?;
            Ok(self.base_value(self.aut.pre_image(name, l, r)?))
        })
    }

    fn omega(&self, ty: &SimpleType) -> Result<SemValue> {
        constant_function(self, ty, &self.top())
    }

    fn little_omega(&self, ty: &SimpleType) -> Result<SemValue> {
        constant_function(self, ty, &self.top())
    }

    fn fix(
        &self,
        ty: &SimpleType,
        f: &mut dyn FnMut(&SemValue) -> Result<SemValue>,
    ) -> Result<SemValue> {
        iterate_to_fixpoint(
            constant_function(self, ty, &self.top())?,
            f,
            chain_bound(self, ty)?,
        )
    }

    fn describe(&self, ty: &SimpleType, v: &SemValue) -> String {
        match (ty.is_base(), self.state_set(v)) {
            (true, Ok(s)) => self.aut.format_set(s),
            _ => match self.domain(ty).ok().and_then(|d| d.index_of(v)) {
                Some(i) => format!("#{i}"),
                None => format!("{v:?}"),
            },
        }
    }
}

/// Evaluates `t` in the GFP model and accepts iff the initial state belongs to
/// the value. The verdict is only meaningful for `Ω`-blind automata; the
/// returned flag is `true` when the automaton is insightful.
pub fn gfp_check(m: &GfpModel, t: &Term) -> Result<(Checked, bool)> {
    check_closed_base(t)?;
    let value = eval_closed(t, m)?;
    let set = m.state_set(&value)?;
    let accepted = set & (1 << m.aut.init()) != 0;
    let checked = Checked {
        accepted,
        rendered: m.aut.format_set(set),
        value,
    };
    Ok((checked, !m.aut.is_omega_blind()))
}

/// Whether `t` denotes exactly the base element `p` in `m`.
pub fn recognized_by_point(m: &dyn Model, p: &SemValue, t: &Term) -> Result<bool> {
    check_closed_base(t)?;
    Ok(eval_closed(t, m)? == *p)
}

/// The dual automata `A_p` of a model over a tree signature: states are the
/// base elements, `δ₀(p, c)` holds iff `p ≤ ρ(c)` and
/// `δ₂(p, a) = {(p₁, p₂) | p ≤ ρ(a)(p₁)(p₂)}`. Entry `i` is started from the
/// base element with index `i`.
pub fn dual_automata(m: &dyn Model, sig: &Signature) -> Result<Vec<TacAutomaton>> {
    let base = m.domain(&SimpleType::Base)?;
    let n = base.len();
    if n > MAX_STATES {
        return Err(Error::Automaton(format!(
            "{n} base elements exceed {} states",
            MAX_STATES
        )));
    }
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut aut = TacAutomaton::new(&refs, refs[0])?;
    let below = |v: &SemValue| -> Result<StateSet> {
        let j = base
            .index_of(v)
            .ok_or_else(|| Error::Internal(format!("{v:?} is not a base element")))?;
        Ok((0..n)
            .filter(|&i| base.leq(i, j))
            .fold(0, |s, i| s | 1 << i))
    };
    let omega_states = below(&m.omega(&SimpleType::Base)?)?;
    for q in 0..n {
        aut.set_leaf(q, OMEGA, omega_states & (1 << q) != 0);
    }
    for name in sig.leaves() {
        let states = below(&m.constant(name, &SimpleType::Base)?)?;
        for q in 0..n {
            aut.set_leaf(q, name, states & (1 << q) != 0);
        }
    }
    for name in sig.binaries() {
        aut.declare_binary(name);
        let f = m.constant(name, &SimpleType::binary())?;
        for q1 in 0..n {
            let g = apply(&base, &f, base.get(q1))?;
            for q2 in 0..n {
                let v = apply(&base, &g, base.get(q2))?;
                let states = below(&v)?;
                for q in (0..n).filter(|q| states & (1 << q) != 0) {
                    aut.add_bin(q, name, q1, q2);
                }
            }
        }
    }
    Ok((0..n).map(|q| aut.with_init(q)).collect())
}
