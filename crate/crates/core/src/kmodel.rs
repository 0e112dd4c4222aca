//! The two-point model `D` and the model `K(Q, Q_Ω)` built from an insightful
//! automaton.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use fixedbitset::FixedBitSet;

use crate::automata::{StateSet, TacAutomaton};
use crate::domains::{
    apply, chain_bound, constant_function, eval_closed, for_each_monotone, full_domain,
    iterate_to_fixpoint, tabulate, DomainCache, FinPoset, Model, SemValue, DEFAULT_CAP,
};
use crate::error::{Error, Result};
use crate::gfp::Checked;
use crate::syntax::{SimpleType, Term};

const BOT: SemValue = SemValue::Base(0);
const TOP: SemValue = SemValue::Base(1);

/// The model with base `{⊥ < ⊤}`, constants at top, `ω` and `Ω` at bottom and
/// least fixpoints. A closed `Ω`-free term of type `o` denotes `⊥` exactly when
/// its Böhm tree is `Ω`.
///
/// Tagged types `[α]` are interpreted as flat posets `⊥ < #0, ..., #k-1` whose
/// sizes are registered up front; `case` on `⊥` is `⊥`.
pub struct DModel {
    tags: BTreeMap<SimpleType, usize>,
    cache: DomainCache,
    cap: usize,
    /// Interpret `ω` as top, i.e. as an ordinary constant.
    cut_as_constant: bool,
}

impl Default for DModel {
    fn default() -> Self {
        DModel::new()
    }
}

impl DModel {
    pub fn new() -> Self {
        DModel {
            tags: BTreeMap::new(),
            cache: DomainCache::default(),
            cap: DEFAULT_CAP,
            cut_as_constant: false,
        }
    }

    /// A `D` model that also interprets the tagged types in `tags`.
    pub fn with_tags(tags: BTreeMap<SimpleType, usize>) -> Self {
        DModel {
            tags,
            ..DModel::new()
        }
    }

    /// Treats the cut `ω` as a convergent constant. Used to decide divergence of
    /// subterms of truncated trees.
    pub fn with_cut_as_constant(mut self) -> Self {
        self.cut_as_constant = true;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    fn base(&self, ty: &SimpleType) -> Result<FinPoset> {
        match ty {
            SimpleType::Base => Ok(FinPoset::chain(
                SimpleType::Base,
                vec!["⊥".into(), "⊤".into()],
            )),
            SimpleType::Tag(of) => {
                let k = *self.tags.get(of).ok_or_else(|| {
                    Error::Uninterpreted(format!("tagged type [{of}] is not registered"))
                })?;
                let mut labels = vec!["⊥".to_string()];
                labels.extend((0..k).map(|i| format!("#{i}")));
                FinPoset::base(ty.clone(), labels, |i, j| i == j || i == 0)
            }
            SimpleType::Arrow(..) => unreachable!("base called on arrow type"),
        }
    }
}

impl Model for DModel {
    fn name(&self) -> &str {
        "D"
    }

    fn domain(&self, ty: &SimpleType) -> Result<Arc<FinPoset>> {
        full_domain(&self.cache, ty, self.cap, &|t| self.base(t))
    }

    fn constant(&self, _name: &str, ty: &SimpleType) -> Result<SemValue> {
        constant_function(self, ty, &TOP)
    }

    fn omega(&self, ty: &SimpleType) -> Result<SemValue> {
        constant_function(self, ty, &BOT)
    }

    fn little_omega(&self, ty: &SimpleType) -> Result<SemValue> {
        if self.cut_as_constant {
            constant_function(self, ty, &TOP)
        } else {
            constant_function(self, ty, &BOT)
        }
    }

    fn fix(
        &self,
        ty: &SimpleType,
        f: &mut dyn FnMut(&SemValue) -> Result<SemValue>,
    ) -> Result<SemValue> {
        iterate_to_fixpoint(
            constant_function(self, ty, &BOT)?,
            f,
            chain_bound(self, ty)?,
        )
    }

    fn element(&self, tag: &SimpleType, index: usize) -> Result<SemValue> {
        match self.tags.get(tag) {
            Some(&k) if index < k => Ok(SemValue::Base(index as u32 + 1)),
            _ => Err(Error::Uninterpreted(format!("#{index}:[{tag}]"))),
        }
    }

    fn case_branch(&self, _tag: &SimpleType, scrutinee: &SemValue) -> Result<Option<usize>> {
        match scrutinee {
            SemValue::Base(0) => Ok(None),
            SemValue::Base(i) => Ok(Some(*i as usize - 1)),
            other => Err(Error::Internal(format!("case on non-base value {other:?}"))),
        }
    }

    fn observes_divergence(&self) -> bool {
        true
    }

    fn denotes_divergence(&self, ty: &SimpleType, v: &SemValue) -> Result<bool> {
        Ok(*v == constant_function(self, ty, &BOT)?)
    }
}

/// Whether the closed `ω`-free term `t : o` has Böhm tree `Ω`.
pub fn divergence_check(t: &Term) -> Result<bool> {
    if t.contains(&|s| matches!(s, Term::LittleOmega(_))) {
        return Err(Error::ContainsLittleOmega);
    }
    check_closed_base(t)?;
    Ok(eval_closed(t, &DModel::new())? == BOT)
}

pub(crate) fn check_closed_base(t: &Term) -> Result<()> {
    if !t.is_closed() || t.type_of()? != SimpleType::Base {
        return Err(Error::NotClosedBase(t.to_string()));
    }
    Ok(())
}

/// Evaluates `t` in `K` and accepts iff the initial state belongs to the second
/// component of the value.
pub fn k_check(m: &KModel, t: &Term) -> Result<Checked> {
    check_closed_base(t)?;
    let value = eval_closed(t, m)?;
    let (_, set) = m.base_parts(&value)?;
    Ok(Checked {
        accepted: set & (1 << m.aut.init()) != 0,
        rendered: m.format_base(&value),
        value,
    })
}

/// An element of `K` together with its projection into `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KValue {
    pub ty: SimpleType,
    pub k: SemValue,
    pub d: SemValue,
}

/// The model `K(Q, Q_Ω)` for an automaton with states `Q` and
/// `Q_Ω = { q | δ₀(q, Ω) }`.
///
/// At `o` the elements are `(⊥, Q_Ω)` (index 0) and `(⊤, P)` for every `P ⊆ Q`
/// (index `1 + P` as a bitmask). At `α -> β` they are the monotone maps `f`
/// for which some `d ∈ D_{α->β}` satisfies `bar(f(g)) = d(bar(g))` for all `g`.
pub struct KModel {
    aut: TacAutomaton,
    n: usize,
    q_omega: StateSet,
    d: DModel,
    cache: DomainCache,
    bars: Mutex<HashMap<SimpleType, Arc<Vec<u32>>>>,
    cap: usize,
    strict: bool,
}

impl KModel {
    pub fn new(aut: &TacAutomaton) -> Self {
        KModel {
            aut: aut.clone(),
            n: aut.n_states(),
            q_omega: aut.q_omega(),
            d: DModel::new(),
            cache: DomainCache::default(),
            bars: Mutex::new(HashMap::new()),
            cap: DEFAULT_CAP,
            strict: false,
        }
    }

    /// Builds `K` at every type a function table is formed at, to check membership.
    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self.d = DModel::new().with_cap(cap);
        self
    }

    pub fn automaton(&self) -> &TacAutomaton {
        &self.aut
    }

    pub fn d_model(&self) -> &DModel {
        &self.d
    }

    pub fn q_omega(&self) -> StateSet {
        self.q_omega
    }

    pub fn all_states(&self) -> StateSet {
        self.aut.all_states()
    }

    /// `(⊥, Q_Ω)` at `o`.
    pub fn base_bottom(&self) -> SemValue {
        SemValue::Base(0)
    }

    /// `(⊤, P)` at `o`.
    pub fn base_top_with(&self, p: StateSet) -> SemValue {
        SemValue::Base(1 + p as u32)
    }

    /// Components of an element of `K_0`.
    pub fn base_parts(&self, v: &SemValue) -> Result<(bool, StateSet)> {
        match v {
            SemValue::Base(0) => Ok((false, self.q_omega)),
            SemValue::Base(i) => Ok((true, (*i - 1) as StateSet)),
            other => Err(Error::Internal(format!("{other:?} is not in K_0"))),
        }
    }

    pub fn format_base(&self, v: &SemValue) -> String {
        match self.base_parts(v) {
            Ok((conv, set)) => format!(
                "({}, {})",
                if conv { "⊤" } else { "⊥" },
                self.aut.format_set(set)
            ),
            Err(_) => format!("{v:?}"),
        }
    }

    fn build_base(&self) -> Result<FinPoset> {
        let size = 1usize << self.n;
        let mut labels = vec![self.format_base(&SemValue::Base(0))];
        labels.extend((0..size).map(|p| self.format_base(&SemValue::Base(1 + p as u32))));
        let qo = self.q_omega as usize;
        FinPoset::base(SimpleType::Base, labels, |i, j| match (i, j) {
            (0, 0) => true,
            (0, j) => qo & !(j - 1) == 0,
            (_, 0) => false,
            (i, j) => (i - 1) & !(j - 1) == 0,
        })
    }

    /// Visits the elements of `K_{a -> b}` without storing them, as tables of
    /// indices into `K_b` together with the index of their projection in
    /// `D_{a -> b}`. Only `K_a` and `K_b` are enumerated.
    pub fn for_each_arrow_element(
        &self,
        a: &SimpleType,
        b: &SimpleType,
        visit: &mut dyn FnMut(&[u32], usize) -> Result<bool>,
    ) -> Result<()> {
        let ty = SimpleType::arrow(a.clone(), b.clone());
        let ka = self.domain(a)?;
        let kb = self.domain(b)?;
        let bar_a = self.bar_table(a)?;
        let bar_b = self.bar_table(b)?;
        let db = self.d.domain(b)?;
        let dab = self.d.domain(&ty)?;
        let mut fibers = vec![FixedBitSet::with_capacity(kb.len()); db.len()];
        for (k, &e) in bar_b.iter().enumerate() {
            fibers[e as usize].insert(k);
        }
        let mut stop = false;
        for di in 0..dab.len() {
            let dt = dab.table_of(di).expect("function table");
            let allowed = |i: usize| fibers[dt[bar_a[i] as usize] as usize].clone();
            for_each_monotone(&ka, &kb, Some(&allowed), &mut |t| {
                let go = visit(t, di)?;
                stop = !go;
                Ok(go)
            })?;
            if stop {
                break;
            }
        }
        Ok(())
    }

    fn build_arrow(&self, a: &SimpleType, b: &SimpleType) -> Result<(FinPoset, Vec<u32>)> {
        let ty = SimpleType::arrow(a.clone(), b.clone());
        let mut tables: Vec<Box<[u32]>> = Vec::new();
        let mut proj: HashMap<Box<[u32]>, u32> = HashMap::new();
        let mut over = false;
        self.for_each_arrow_element(a, b, &mut |t, di| {
            if tables.len() >= self.cap {
                over = true;
                return Ok(false);
            }
            proj.insert(t.into(), di as u32);
            tables.push(t.into());
            Ok(true)
        })?;
        if over {
            return Err(Error::SpaceTooLarge {
                ty: ty.to_string(),
                cap: self.cap,
            });
        }
        let poset = FinPoset::from_tables(ty, self.domain(a)?, self.domain(b)?, tables);
        let bars = (0..poset.len())
            .map(|i| proj[poset.table_of(i).expect("table")])
            .collect();
        Ok((poset, bars))
    }

    /// Projections into `D` of the enumerated elements of `K_ty`.
    pub fn bar_table(&self, ty: &SimpleType) -> Result<Arc<Vec<u32>>> {
        if let Some(b) = self.bars.lock().expect("bar cache poisoned").get(ty) {
            return Ok(b.clone());
        }
        let dom = self.domain(ty)?;
        if ty.is_base() {
            let b: Vec<u32> = (0..dom.len()).map(|i| u32::from(i != 0)).collect();
            let mut m = self.bars.lock().expect("bar cache poisoned");
            return Ok(m.entry(ty.clone()).or_insert_with(|| Arc::new(b)).clone());
        }
        Ok(self
            .bars
            .lock()
            .expect("bar cache poisoned")
            .get(ty)
            .cloned()
            .expect("bars stored with domain"))
    }

    /// `bar(v)`: the unique `D` element related to `v`.
    pub fn bar(&self, ty: &SimpleType, v: &SemValue) -> Result<SemValue> {
        match ty.split_arrow() {
            None => Ok(if *v == SemValue::Base(0) { BOT } else { TOP }),
            Some((a, b)) => {
                if let Some(dom) = self.cache.get(ty) {
                    if let Some(i) = dom.index_of(v) {
                        let bars = self.bar_table(ty)?;
                        return Ok(self.d.domain(ty)?.get(bars[i] as usize).clone());
                    }
                }
                let da = self.d.domain(a)?;
                let ka = self.domain(a)?;
                let mut out = Vec::with_capacity(da.len());
                for e in da.elements() {
                    let up = self.uparrow(a, e)?;
                    out.push(self.bar(b, &apply(&ka, v, &up)?)?);
                }
                Ok(SemValue::Fun(out.into()))
            }
        }
    }

    /// `h↑`: the greatest element of `K` whose projection is `h`.
    pub fn uparrow(&self, ty: &SimpleType, h: &SemValue) -> Result<SemValue> {
        match ty.split_arrow() {
            None => Ok(if *h == BOT {
                SemValue::Base(0)
            } else {
                SemValue::Base(1 + self.all_states() as u32)
            }),
            Some((a, b)) => {
                let ka = self.domain(a)?;
                let da = self.d.domain(a)?;
                let bars = self.bar_table(a)?;
                let mut out = Vec::with_capacity(ka.len());
                for &e in bars.iter() {
                    out.push(self.uparrow(b, &apply(&da, h, da.get(e as usize))?)?);
                }
                Ok(SemValue::Fun(out.into()))
            }
        }
    }

    /// `⊥̂`: the constant function with value `(⊥, Q_Ω)`.
    pub fn bottom_hat(&self, ty: &SimpleType) -> Result<SemValue> {
        constant_function(self, ty, &SemValue::Base(0))
    }

    /// `⊤̂`: the greatest element.
    pub fn top_hat(&self, ty: &SimpleType) -> Result<SemValue> {
        constant_function(self, ty, &self.base_top_with(self.all_states()))
    }

    /// `Fix(f) = ⋀ₙ fⁿ(fix(bar f)↑)`, given `f` by its action.
    pub fn fix_with(
        &self,
        ty: &SimpleType,
        f: &mut dyn FnMut(&SemValue) -> Result<SemValue>,
    ) -> Result<SemValue> {
        let da = self.d.domain(ty)?;
        let mut fbar = Vec::with_capacity(da.len());
        for e in da.elements() {
            let up = self.uparrow(ty, e)?;
            fbar.push(self.bar(ty, &f(&up)?)?);
        }
        let fbar = SemValue::Fun(fbar.into());
        let lfp = crate::domains::kleene_lfp(&fbar, &da)?;
        let start = self.uparrow(ty, &lfp)?;
        let bound = chain_bound(self, ty)?;
        let mut prev = start.clone();
        let mut step = |x: &SemValue| -> Result<SemValue> {
            let y = f(x)?;
            if !self.leq(ty, &y, &prev)? {
                return Err(Error::Internal(format!(
                    "Fix iteration at {ty} is not decreasing"
                )));
            }
            prev = y.clone();
            Ok(y)
        };
        iterate_to_fixpoint(start, &mut step, bound)
    }

    /// Pointwise order, without enumerating `K_ty`.
    pub fn leq(&self, ty: &SimpleType, x: &SemValue, y: &SemValue) -> Result<bool> {
        match ty.split_arrow() {
            None => Ok(self.domain(ty)?.leq_values(x, y)),
            Some((_, b)) => match (x, y) {
                (SemValue::Fun(xs), SemValue::Fun(ys)) if xs.len() == ys.len() => {
                    for (u, v) in xs.iter().zip(ys.iter()) {
                        if !self.leq(b, u, v)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                _ => Err(Error::Internal(format!("ill-shaped values at {ty}"))),
            },
        }
    }

    /// `Fix` applied to an enumerated element of `K_{ty -> ty}`.
    pub fn fix_k(&self, ty: &SimpleType, f: &SemValue) -> Result<SemValue> {
        let kdom = self.domain(ty)?;
        self.fix_with(ty, &mut |x| apply(&kdom, f, x))
    }

    pub fn kvalue(&self, ty: &SimpleType, k: SemValue) -> Result<KValue> {
        let d = self.bar(ty, &k)?;
        Ok(KValue {
            ty: ty.clone(),
            k,
            d,
        })
    }

    /// Textual dump of `K_ty` with projections.
    pub fn dump(&self, ty: &SimpleType) -> Result<String> {
        let dom = self.domain(ty)?;
        let bars = self.bar_table(ty)?;
        let ddom = self.d.domain(ty)?;
        dom.dump(&|i| format!("{}  bar={}", dom.label(i), ddom.label(bars[i] as usize)))
    }
}

impl Model for KModel {
    fn name(&self) -> &str {
        "K"
    }

    fn domain(&self, ty: &SimpleType) -> Result<Arc<FinPoset>> {
        if let Some(d) = self.cache.get(ty) {
            return Ok(d);
        }
        match ty {
            SimpleType::Base => self.cache.get_or_build(ty, || self.build_base()),
            SimpleType::Arrow(a, b) => {
                let (poset, bars) = self.build_arrow(a, b)?;
                let mut stored_bars = false;
                let d = self.cache.get_or_build(ty, || {
                    stored_bars = true;
                    Ok(poset)
                })?;
                if stored_bars {
                    self.bars
                        .lock()
                        .expect("bar cache poisoned")
                        .entry(ty.clone())
                        .or_insert(Arc::new(bars));
                }
                Ok(d)
            }
            SimpleType::Tag(_) => Err(Error::Uninterpreted(format!("tagged type {ty} in K"))),
        }
    }

    fn constant(&self, name: &str, ty: &SimpleType) -> Result<SemValue> {
        if ty.is_base() {
            return Ok(self.base_top_with(self.aut.leaf_states(name)?));
        }
        if *ty != SimpleType::binary() {
            return Err(Error::NotTreeSignature(format!("{name} : {ty}")));
        }
        self.aut.delta2(0, name)?;
        tabulate(self, ty, &mut |args| {
            let (_, r1) = self.base_parts(&args[0])?;
            let (_, r2) = self.base_parts(&args[1])?;
            Ok(self.base_top_with(self.aut.pre_image(name, r1, r2)?))
        })
    }

    fn omega(&self, ty: &SimpleType) -> Result<SemValue> {
        self.bottom_hat(ty)
    }

    fn little_omega(&self, ty: &SimpleType) -> Result<SemValue> {
        self.top_hat(ty)
    }

    fn fix(
        &self,
        ty: &SimpleType,
        f: &mut dyn FnMut(&SemValue) -> Result<SemValue>,
    ) -> Result<SemValue> {
        self.fix_with(ty, f)
    }

    fn observes_divergence(&self) -> bool {
        true
    }

    fn denotes_divergence(&self, ty: &SimpleType, v: &SemValue) -> Result<bool> {
        Ok(self.bar(ty, v)? == constant_function(&self.d, ty, &BOT)?)
    }

    fn check_member(&self, ty: &SimpleType, v: &SemValue) -> Result<()> {
        let dom = if self.strict {
            Some(self.domain(ty)?)
        } else {
            self.cache.get(ty)
        };
        match dom {
            Some(d) if !d.contains(v) => Err(Error::Internal(format!(
                "table {v:?} at {ty} is not an element of K"
            ))),
            _ => Ok(()),
        }
    }

    fn describe(&self, ty: &SimpleType, v: &SemValue) -> String {
        if ty.is_base() {
            return self.format_base(v);
        }
        match self.domain(ty).ok().and_then(|d| d.index_of(v)) {
            Some(i) => format!("#{i}"),
            None => format!("{v:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::ExampleAutomaton;
    use crate::syntax::{parse_term, Signature};

    fn o() -> SimpleType {
        SimpleType::Base
    }

    fn oo() -> SimpleType {
        SimpleType::arrow(o(), o())
    }

    fn fig1() -> TacAutomaton {
        // Q = {1, 2}, Q_Ω = {1}
        let mut a = TacAutomaton::new(&["1", "2"], "1").unwrap();
        a.set_leaf(0, "Omega", true);
        a
    }

    #[test]
    fn fig1_base_order() {
        let k = KModel::new(&fig1());
        let d = k.domain(&o()).unwrap();
        assert_eq!(d.len(), 5);
        let labels: Vec<String> = (0..5).map(|i| d.label(i)).collect();
        assert_eq!(
            labels,
            ["(⊥, {1})", "(⊤, {})", "(⊤, {1})", "(⊤, {2})", "(⊤, {1, 2})"]
        );
        assert_eq!(
            d.hasse_edges().unwrap(),
            vec![(0, 2), (1, 2), (1, 3), (2, 4), (3, 4)]
        );
    }

    #[test]
    fn singleton_base() {
        let sig = Signature::with_tree(&[("c", 0), ("a", 2)]).unwrap();
        let a1 = TacAutomaton::example(ExampleAutomaton::NoOmega, &sig).unwrap();
        let k = KModel::new(&a1);
        let d = k.domain(&o()).unwrap();
        let labels: Vec<String> = (0..3).map(|i| d.label(i)).collect();
        assert_eq!(labels, ["(⊥, {})", "(⊤, {})", "(⊤, {q})"]);
        assert!(d.leq(0, 1));
        assert_eq!(d.top(), Some(2));
    }

    #[test]
    fn uparrow_and_bar_at_base() {
        let k = KModel::new(&fig1());
        assert_eq!(k.format_base(&k.uparrow(&o(), &BOT).unwrap()), "(⊥, {1})");
        assert_eq!(
            k.format_base(&k.uparrow(&o(), &TOP).unwrap()),
            "(⊤, {1, 2})"
        );
        assert_eq!(k.bar(&o(), &k.base_top_with(0b10)).unwrap(), TOP);
        assert_eq!(k.bar(&o(), &k.base_bottom()).unwrap(), BOT);
    }

    #[test]
    fn fix_examples() {
        let k = KModel::new(&fig1());
        let kd = k.domain(&oo()).unwrap();
        let id = kd
            .elements()
            .iter()
            .find(|f| {
                f.table()
                    .unwrap()
                    .iter()
                    .enumerate()
                    .all(|(i, v)| *v == SemValue::Base(i as u32))
            })
            .unwrap()
            .clone();
        assert_eq!(k.fix_k(&o(), &id).unwrap(), k.base_bottom());
        let c = SemValue::constant(5, k.base_top_with(0b10));
        assert_eq!(k.fix_k(&o(), &c).unwrap(), k.base_top_with(0b10));
    }

    #[test]
    fn divergence_examples() {
        let sig = Signature::with_tree(&[("c", 0), ("a", 2)]).unwrap();
        let t = |s: &str| parse_term(s, &sig).unwrap();
        assert!(divergence_check(&t("Y (\\x:o. x)")).unwrap());
        assert!(!divergence_check(&t("c")).unwrap());
        assert!(!divergence_check(&t("a c (Y (\\x:o. x))")).unwrap());
        assert!(matches!(
            divergence_check(&t("a c (omega:o)")),
            Err(Error::ContainsLittleOmega)
        ));
    }

    #[test]
    fn no_omega_verdicts() {
        let sig = Signature::with_tree(&[("c", 0), ("a", 2)]).unwrap();
        let a1 = TacAutomaton::example(crate::automata::ExampleAutomaton::NoOmega, &sig).unwrap();
        let k = KModel::new(&a1);
        let check = |s: &str| k_check(&k, &parse_term(s, &sig).unwrap()).unwrap();
        let r = check("Y (\\x:o. x)");
        assert!(!r.accepted);
        assert_eq!(r.rendered, "(⊥, {})");
        assert!(!check("a c (Y (\\x:o. x))").accepted);
        assert!(check("c").accepted);
        assert!(check("a c c").accepted);
        assert!(check("Y (\\F:o -> o. \\x:o. a x (F x)) c").accepted);
    }
}
