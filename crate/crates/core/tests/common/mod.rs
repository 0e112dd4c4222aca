//! Shared corpus, automata, random terms and independent oracles.
#![allow(dead_code)]

pub mod laws;

use std::collections::BTreeMap;
use std::sync::Arc;

use lyc::domains::{apply, mono_space, FinPoset, DEFAULT_CAP};
use lyc::scheme::Scheme;
use lyc::syntax::Name;
use lyc::{
    parse_term, DModel, ExampleAutomaton, KModel, Label, LabeledTree, Model, SemValue, Signature,
    SimpleType, TacAutomaton, Term,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HEADER: &str = "const c : o;\nconst d : o;\nconst a : o -> o -> o;\n";

pub fn sig() -> Signature {
    Signature::with_tree(&[("c", 0), ("d", 0), ("a", 2)]).unwrap()
}

pub fn term(s: &str) -> Term {
    parse_term(s, &sig()).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn o() -> SimpleType {
    SimpleType::Base
}

pub fn arrow(a: SimpleType, b: SimpleType) -> SimpleType {
    SimpleType::arrow(a, b)
}

pub fn oo() -> SimpleType {
    arrow(o(), o())
}

pub fn ooo() -> SimpleType {
    arrow(o(), oo())
}

pub fn oo_o() -> SimpleType {
    arrow(oo(), o())
}

// ---------------------------------------------------------------- corpus

/// Closed terms of type `o` with no head normal form.
pub const DIVERGENT: &[&str] = &[
    "Omega:o",
    "Y (\\x:o. x)",
    "(\\x:o. x) (Y (\\x:o. x))",
    "Y (\\f:o->o. f) c",
    "Y (\\f:o->o. \\x:o. f x) c",
    "Y (\\f:o->o. \\x:o. f (a x x)) c",
    "(\\x:o. \\y:o. y) c Omega:o",
    "(\\g:o->o. g c) (\\x:o. Omega:o)",
    "(\\g:(o->o)->o. g (\\x:o. x)) (\\h:o->o. h (Y (\\z:o. z)))",
    "Y (\\f:o->o->o. \\x:o. \\y:o. f y x) c d",
    "Y (\\F:(o->o)->o. \\g:o->o. F (\\x:o. g (g x))) (\\x:o. a x x)",
    "(\\n:(o->o)->o->o. n (\\x:o. x) Omega:o) (\\s:o->o. \\z:o. s (s z))",
    "Omega:(o->o) c",
    "(\\f:o->o. f (f Omega:o)) (\\x:o. x)",
    "Y (\\x:o. (\\y:o. y) x)",
    "Y (\\f:o->o. \\x:o. (\\y:o. f y) (a x c)) d",
    "Y (\\F:(o->o)->o->o. \\g:o->o. \\x:o. F g (g x)) (\\y:o. a y y) c",
    "(\\h:o->o->o. h Omega:o c) (\\x:o. \\y:o. x)",
    "Y (\\f:o->o. f) (Y (\\x:o. a x x))",
    "(\\p:o. Y (\\x:o. x)) c",
];

/// Closed terms of type `o` with a head normal form.
pub const CONVERGENT: &[&str] = &[
    "c",
    "a c d",
    "a Omega:o Omega:o",
    "Y (\\x:o. a x x)",
    "Y (\\f:o->o. \\x:o. a x (f x)) c",
    "(\\x:o. x) c",
    "(\\x:o. \\y:o. x) d Omega:o",
    "(\\g:o->o. g c) (\\x:o. a x x)",
    "Y (\\F:(o->o)->o. \\g:o->o. g (F (\\x:o. g x))) (\\x:o. a x c)",
    "(\\n:(o->o)->o->o. n (\\x:o. c) Omega:o) (\\s:o->o. \\z:o. s (s z))",
    "Y (\\f:o->o. \\x:o. a (f x) (f (a x x))) d",
    "Y (\\x:o. a (Y (\\y:o. y)) x)",
    "(\\f:o->o. f (f d)) (\\x:o. a x c)",
    "Y (\\f:o->o->o. \\x:o. \\y:o. a x (f y x)) c d",
    "(\\x:o. c) (Y (\\x:o. x))",
    "Y (\\F:(o->o)->o->o. \\g:o->o. \\x:o. g (F g x)) (\\y:o. a y d) c",
    "(\\g:(o->o)->o. g (\\x:o. a x x)) (\\h:o->o. h Omega:o)",
    "Y (\\f:o->o. \\x:o. x) d",
    "Y (\\x:o. Y (\\y:o. a x y))",
    "(\\h:o->o->o. h c Omega:o) (\\x:o. \\y:o. x)",
];

/// Contexts preserving solvability of the term substituted for `@`.
const CONTEXTS: &[&str] = &[
    "(\\z:o. z) (@)",
    "(\\z:o. \\w:o. z) (@) (Y (\\w:o. w))",
    "(\\z:o. \\w:o. w) (a c c) (@)",
    "Y (\\zz:o. @)",
    "(\\g:o->o. g (g (@))) (\\v:o. v)",
];

/// The divergence corpus: 50 closed terms of type `o` with their known
/// solvability, `true` for divergent.
pub fn divergence_corpus() -> Vec<(String, bool)> {
    let mut out: Vec<(String, bool)> = DIVERGENT.iter().map(|s| (s.to_string(), true)).collect();
    out.extend(CONVERGENT.iter().map(|s| (s.to_string(), false)));
    for i in 0..10 {
        let ctx = CONTEXTS[i % CONTEXTS.len()];
        let (inner, div) = if i % 2 == 0 {
            (DIVERGENT[(3 * i + 1) % DIVERGENT.len()], true)
        } else {
            (CONVERGENT[(3 * i + 2) % CONVERGENT.len()], false)
        };
        out.push((ctx.replace('@', inner), div));
    }
    out
}

/// Closed terms `M : α -> α` for the fixpoint equation `Y M = M (Y M)`.
pub const FIX_BODIES: &[&str] = &[
    "\\x:o. x",
    "\\x:o. a x x",
    "\\x:o. c",
    "\\x:o. a c x",
    "\\x:o. a x (a x d)",
    "\\x:o. (\\y:o. y) x",
    "\\x:o. Omega:o",
    "\\x:o. a (Y (\\y:o. y)) x",
    "\\x:o. a x Omega:o",
    "\\x:o. (\\g:o->o. g x) (\\y:o. a y c)",
    "\\f:o->o. f",
    "\\f:o->o. \\x:o. a x (f x)",
    "\\f:o->o. \\x:o. f (a x x)",
    "\\f:o->o. \\x:o. x",
    "\\f:o->o. \\x:o. a (f c) x",
    "\\f:o->o. \\x:o. f (f x)",
    "\\f:o->o. \\x:o. a (f x) (f d)",
    "\\f:o->o. \\x:o. c",
    "\\f:o->o. \\x:o. a x Omega:o",
    "\\f:o->o. \\x:o. f x",
    "\\f:o->o->o. \\x:o. \\y:o. f y x",
    "\\f:o->o->o. \\x:o. \\y:o. a x (f y x)",
    "\\f:o->o->o. \\x:o. \\y:o. a (f x x) y",
    "\\f:o->o->o. f",
    "\\F:(o->o)->o. \\g:o->o. g (F g)",
    "\\F:(o->o)->o. \\g:o->o. F (\\x:o. g (g x))",
    "\\F:(o->o)->o. \\g:o->o. g c",
    "\\F:(o->o)->o. \\g:o->o. a (g c) (F g)",
    "\\F:(o->o)->o->o. \\g:o->o. \\x:o. g (F g x)",
    "\\F:(o->o)->o->o. \\g:o->o. \\x:o. F g (g x)",
];

/// Closed terms of type `o` whose Böhm trees are finite.
pub const FINITE_BT: &[&str] = &[
    "c",
    "d",
    "a c d",
    "a (a c c) d",
    "a Omega:o c",
    "Omega:o",
    "(\\x:o. a x x) c",
    "(\\f:o->o. f (f c)) (\\x:o. a x d)",
    "Y (\\x:o. c)",
    "Y (\\f:o->o. \\x:o. x) d",
    "(\\x:o. \\y:o. a y x) c d",
    "Y (\\x:o. x)",
    "a (Y (\\x:o. x)) c",
    "(\\g:(o->o)->o. g (\\x:o. a x x)) (\\h:o->o. h c)",
    "(\\n:(o->o)->o->o. n (\\x:o. a x c) d) (\\s:o->o. \\z:o. s (s (s z)))",
    "Y (\\f:o->o. \\x:o. x) (a c c)",
    "a (a (a c d) (a d c)) Omega:o",
    "(\\x:o. a x (a x x)) (a c Omega:o)",
    "Y (\\F:(o->o)->o. \\g:o->o. g c) (\\x:o. a x x)",
    "(\\x:o. \\y:o. x) c (Y (\\x:o. a x x))",
    "(\\h:o->o->o. h (h c d) (h d c)) (\\x:o. \\y:o. a y x)",
    "Y (\\x:o. Omega:o)",
    "(\\f:o->o. a (f c) (f d)) (\\x:o. Omega:o)",
    "a d (Y (\\f:o->o. f) c)",
    "(\\p:o. \\q:o. a q (a p q)) d c",
    "(\\g:o->o->o. g c (g d c)) (\\x:o. \\y:o. a x y)",
    "(\\x:o. x) ((\\x:o. a x x) d)",
    "Y (\\f:o->o->o. \\x:o. \\y:o. a y x) c d",
    "(\\k:o->o. k (k (k c))) (\\x:o. a x c)",
    "(\\h:o->o->o. h d d) a",
];

/// Closed terms of type `o` for reflection, several with infinite Böhm trees.
pub const REFLECTION: &[&str] = &[
    "c",
    "a c d",
    "a c (Y (\\x:o. x))",
    "Y (\\f:o->o. \\x:o. a x (f x)) c",
    "Y (\\x:o. a x x)",
    "Y (\\x:o. a c x)",
    "(\\x:o. a x x) d",
    "(\\f:o->o. f (f c)) (\\x:o. a x d)",
    "Y (\\f:o->o. \\x:o. a x (f (a x x))) c",
    "(\\x:o. \\y:o. a y x) c Omega:o",
    "Y (\\x:o. x)",
    "Y (\\f:o->o. \\x:o. a (f d) x) c",
    "(\\g:o->o. a (g c) (g d)) (\\x:o. a x x)",
    "Y (\\f:o->o->o. \\x:o. \\y:o. a x (f y x)) c d",
    "a (Y (\\x:o. a d x)) (Y (\\x:o. x))",
    "(\\h:o->o->o. h c (h d c)) a",
    "Y (\\f:o->o. \\x:o. a x (f c)) (a d d)",
    "(\\p:o. Y (\\x:o. a p x)) c",
    "Y (\\f:o->o. f) c",
    "(\\x:o. a x (Y (\\y:o. a y x))) d",
];

/// Recursion schemes, without the constant declarations of [`HEADER`].
pub const SCHEMES: &[&str] = &[
    "S : o = c .",
    "S : o = a c S .",
    "S : o = F c .\nF x : o -> o = a x (F x) .",
    "S : o = F c .\nF x : o -> o = a x (G x) .\nG y : o -> o = a (F y) d .",
    "S : o = F c d .\nF x y : o -> o -> o = a x (F y x) .",
    "S : o = H F .\nH g : (o -> o) -> o = g (H g) .\nF x : o -> o = a x c .",
    "S : o = F (a c d) .\nF x : o -> o = a x (F (a x x)) .",
    "S : o = L .\nL : o = L .",
    "S : o = a S L .\nL : o = L .",
    "S : o = T (D c) .\nT x : o -> o = a x (T (D x)) .\nD x : o -> o = a x x .",
];

pub fn scheme(text: &str) -> Scheme {
    Scheme::parse(&format!("{HEADER}{text}")).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Every closed term of type `o` of the corpus, including translated schemes.
pub fn all_base_terms() -> Vec<(String, Term)> {
    let mut out: Vec<(String, Term)> = divergence_corpus()
        .into_iter()
        .map(|(s, _)| {
            let t = term(&s);
            (s, t)
        })
        .collect();
    for s in FINITE_BT.iter().chain(REFLECTION) {
        out.push((s.to_string(), term(s)));
    }
    for s in SCHEMES {
        let t = lyc::scheme::scheme_to_lamy(&scheme(s)).unwrap();
        out.push((format!("scheme `{s}`"), t));
    }
    out
}

/// The deepest nesting of `Y` occurrences in `t`. Reflections grow
/// exponentially with it, since each fixpoint is unrolled along its chain.
pub fn fix_nesting(t: &Term) -> usize {
    match t {
        Term::Fix(_) => 1,
        Term::App(f, x) if matches!(**f, Term::Fix(_)) => 1 + fix_nesting(x),
        Term::App(f, x) => fix_nesting(f).max(fix_nesting(x)),
        Term::Abs { body, .. } => fix_nesting(body),
        Term::Case {
            scrutinee,
            branches,
        } => branches
            .iter()
            .map(fix_nesting)
            .fold(fix_nesting(scrutinee), usize::max),
        _ => 0,
    }
}

/// The largest binder or fixpoint type of `t`, by domain-size order.
pub fn max_binder_order(t: &Term) -> usize {
    match t {
        Term::Abs { var_ty, body, .. } => var_ty.order().max(max_binder_order(body)),
        Term::App(f, x) => max_binder_order(f).max(max_binder_order(x)),
        Term::Fix(ty) => ty.order(),
        Term::Case {
            scrutinee,
            branches,
        } => branches
            .iter()
            .map(max_binder_order)
            .fold(max_binder_order(scrutinee), usize::max),
        _ => 0,
    }
}

/// Whether every binder and fixpoint of `t` is at `o` or `o -> o`.
pub fn small_binders(t: &Term) -> bool {
    fn ok(ty: &SimpleType) -> bool {
        *ty == SimpleType::Base || *ty == oo()
    }
    match t {
        Term::Abs { var_ty, body, .. } => ok(var_ty) && small_binders(body),
        Term::App(f, x) => small_binders(f) && small_binders(x),
        Term::Fix(ty) => ok(ty),
        _ => true,
    }
}

// -------------------------------------------------------------- automata

pub fn a1() -> TacAutomaton {
    TacAutomaton::example(ExampleAutomaton::NoOmega, &sig()).unwrap()
}

pub fn has_hnf() -> TacAutomaton {
    TacAutomaton::example(ExampleAutomaton::HasHnf, &sig()).unwrap()
}

/// States `e`, `u`: `c` at even depth, `d` at odd depth; `Ω` allowed at even depth.
pub fn parity() -> TacAutomaton {
    let mut a = TacAutomaton::new(&["e", "u"], "e").unwrap();
    a.set_leaf(0, "c", true);
    a.set_leaf(0, "d", false);
    a.set_leaf(1, "c", false);
    a.set_leaf(1, "d", true);
    a.set_leaf(0, "Omega", true);
    a.set_leaf(1, "Omega", false);
    a.add_bin(0, "a", 1, 1);
    a.add_bin(1, "a", 0, 0);
    a
}

/// Three states: `l` requires the leftmost leaf to be `c`; `r` accepts everything
/// but `Ω`; `t` accepts everything.
pub fn leftmost() -> TacAutomaton {
    let mut a = TacAutomaton::new(&["l", "r", "t"], "l").unwrap();
    a.set_leaf(0, "c", true);
    a.set_leaf(0, "d", false);
    a.set_leaf(1, "c", true);
    a.set_leaf(1, "d", true);
    a.set_leaf(2, "c", true);
    a.set_leaf(2, "d", true);
    a.set_leaf(0, "Omega", false);
    a.set_leaf(1, "Omega", false);
    a.set_leaf(2, "Omega", true);
    a.add_bin(0, "a", 0, 1);
    a.add_bin(1, "a", 1, 1);
    a.add_bin(2, "a", 2, 2);
    a
}

/// Automata with up to two states for `K` checks.
pub fn k_automata() -> Vec<(&'static str, TacAutomaton)> {
    vec![("A1", a1()), ("HasHnf", has_hnf()), ("Parity", parity())]
}

/// An automaton over no constants with states `1..=n` and the given `Q_Ω`.
pub fn bare_automaton(n: usize, q_omega: u64) -> TacAutomaton {
    let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut a = TacAutomaton::new(&refs, "1").unwrap();
    for q in 0..n {
        a.set_leaf(q, "Omega", q_omega & (1 << q) != 0);
    }
    a
}

/// Every `(|Q|, Q_Ω)` with `|Q| ∈ {1, 2}`.
pub fn small_k_configs() -> Vec<(usize, u64)> {
    vec![(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (2, 3)]
}

// ------------------------------------------------------- finite tree runs

/// Exact run of `aut` on a finite tree, by direct recursion over states;
/// independent of the library's run computation. `Cut` leaves are rejected.
pub fn run_accepts(aut: &TacAutomaton, q: usize, t: &LabeledTree) -> bool {
    match (&t.label, t.children.as_slice()) {
        (Label::Cut, []) => false,
        (Label::Omega, []) => aut.q_omega() & (1 << q) != 0,
        (Label::Const(n) | Label::Annotated(n, _), []) => aut.delta0(q, n).unwrap(),
        (Label::Const(n) | Label::Annotated(n, _), [l, r]) => aut
            .delta2(q, n)
            .unwrap()
            .iter()
            .any(|&(ql, qr)| run_accepts(aut, ql, l) && run_accepts(aut, qr, r)),
        _ => panic!("malformed tree {t}"),
    }
}

// ------------------------------------------------------ scheme rewriting

/// The value tree of a scheme to depth `depth` by outermost rewriting of
/// applicative terms. A head that does not reach a terminal within `fuel`
/// rewrites is `Ω`.
pub fn rewrite_scheme(s: &Scheme, depth: usize, fuel: usize) -> LabeledTree {
    let start = Term::var(&s.start, SimpleType::Base);
    rewrite_node(s, &start, depth, fuel)
}

fn rewrite_node(s: &Scheme, t: &Term, depth: usize, fuel: usize) -> LabeledTree {
    if depth == 0 {
        return LabeledTree::cut();
    }
    let mut cur = t.clone();
    for _ in 0..fuel {
        let (head, args) = cur.spine();
        let args: Vec<Term> = args.into_iter().cloned().collect();
        match head {
            Term::Const { name, .. } => {
                let children: Vec<LabeledTree> = args
                    .iter()
                    .map(|x| rewrite_node(s, x, depth - 1, fuel))
                    .collect();
                return LabeledTree {
                    label: Label::Const(name.to_string()),
                    children,
                };
            }
            Term::Var { name, .. } => {
                let rule = s.rule(name).expect("nonterminal");
                let n = rule.params.len();
                let mut subst: BTreeMap<Name, Term> = BTreeMap::new();
                for ((p, _), x) in rule.params.iter().zip(&args) {
                    subst.insert(p.as_str().into(), x.clone());
                }
                let body = rule.body.substitute(&subst).unwrap();
                cur = Term::apps(body, args[n..].iter().cloned());
            }
            other => panic!("unexpected head {other}"),
        }
    }
    LabeledTree::omega()
}

// --------------------------------------------------------- random terms

/// Deterministic generator of well-typed closed terms. Binders and fixpoints
/// are at `o` or `o -> o`, so every model can enumerate their domains.
pub struct TermGen {
    rng: ChaCha8Rng,
    fresh: usize,
}

impl TermGen {
    pub fn new(seed: u64) -> Self {
        TermGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            fresh: 0,
        }
    }

    pub fn closed(&mut self, ty: &SimpleType, size: usize) -> Term {
        let t = self.gen(ty, &mut Vec::new(), size);
        debug_assert!(t.is_closed());
        t
    }

    fn name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn small_type(&mut self) -> SimpleType {
        if self.rng.gen_bool(0.7) {
            o()
        } else {
            oo()
        }
    }

    fn leaf(&mut self, ty: &SimpleType, ctx: &mut Vec<(String, SimpleType)>) -> Term {
        let vars: Vec<&(String, SimpleType)> = ctx.iter().filter(|(_, t)| t == ty).collect();
        if !vars.is_empty() && self.rng.gen_bool(0.7) {
            let (n, t) = vars[self.rng.gen_range(0..vars.len())];
            return Term::var(n, t.clone());
        }
        match ty.split_arrow() {
            None => match self.rng.gen_range(0..10) {
                0 => Term::Omega(o()),
                1..=5 => Term::constant("c", o()),
                _ => Term::constant("d", o()),
            },
            Some((dom, cod)) => {
                let x = self.name("x");
                ctx.push((x.clone(), dom.clone()));
                let body = self.leaf(&cod.clone(), ctx);
                ctx.pop();
                Term::abs(&x, dom.clone(), body)
            }
        }
    }

    fn gen(&mut self, ty: &SimpleType, ctx: &mut Vec<(String, SimpleType)>, size: usize) -> Term {
        if size <= 1 {
            return self.leaf(ty, ctx);
        }
        let fixable = *ty == o() || *ty == oo();
        loop {
            match self.rng.gen_range(0..7) {
                0 | 1 => {
                    if let Some((dom, cod)) = ty.split_arrow() {
                        let x = self.name("x");
                        ctx.push((x.clone(), dom.clone()));
                        let body = self.gen(&cod.clone(), ctx, size - 1);
                        ctx.pop();
                        return Term::abs(&x, dom.clone(), body);
                    }
                    if *ty == o() {
                        let split = self.rng.gen_range(1..size);
                        let l = self.gen(&o(), ctx, split);
                        let r = self.gen(&o(), ctx, size - split);
                        return Term::apps(Term::constant("a", SimpleType::binary()), [l, r]);
                    }
                }
                2 | 3 => {
                    let arg_ty = self.small_type();
                    let split = self.rng.gen_range(1..size);
                    let fun_ty = arrow(arg_ty.clone(), ty.clone());
                    let f = self.gen(&fun_ty, ctx, split);
                    let x = self.gen(&arg_ty, ctx, size - split);
                    return Term::app(f, x);
                }
                4 if fixable => {
                    let m = self.gen(&arrow(ty.clone(), ty.clone()), ctx, size - 1);
                    return Term::fix_app(m).unwrap();
                }
                5 => {
                    let heads: Vec<(String, SimpleType)> = ctx
                        .iter()
                        .filter(|(_, t)| t.split_arrow().map(|(_, c)| c == ty).unwrap_or(false))
                        .cloned()
                        .collect();
                    if !heads.is_empty() {
                        let (n, t) = heads[self.rng.gen_range(0..heads.len())].clone();
                        let (dom, _) = t.split_arrow().unwrap();
                        let x = self.gen(&dom.clone(), ctx, size - 1);
                        return Term::app(Term::var(&n, t.clone()), x);
                    }
                }
                6 if *ty == oo() => {
                    let x = self.gen(&o(), ctx, size - 1);
                    return Term::app(Term::constant("a", SimpleType::binary()), x);
                }
                _ => {}
            }
            if self.rng.gen_bool(0.2) {
                return self.leaf(ty, ctx);
            }
        }
    }
}

// ------------------------------------------------ K by filtering definitions

/// A domain with, for each element, the indices of the related `D` elements.
pub type BruteDomain = (Arc<FinPoset>, Arc<Vec<Vec<usize>>>);

/// `K` and its logical relation computed straight from the definition: the
/// monotone space filtered by the existence of a related `D` element.
pub struct BruteK {
    pub d: DModel,
    pub k: KModel,
    /// Per type: the domain and, for each element, the set of related `D` indices.
    cache: std::sync::Mutex<BTreeMap<SimpleType, BruteDomain>>,
}

impl BruteK {
    pub fn new(aut: &TacAutomaton) -> Self {
        BruteK {
            d: DModel::new(),
            k: KModel::new(aut),
            cache: Default::default(),
        }
    }

    /// The domain at `ty` and the relation `L` as lists of `D` indices.
    pub fn domain(&self, ty: &SimpleType) -> BruteDomain {
        if let Some(v) = self.cache.lock().unwrap().get(ty) {
            return v.clone();
        }
        let out = match ty.split_arrow() {
            None => {
                let base = self.k.domain(ty).unwrap();
                let rel = (0..base.len()).map(|i| vec![usize::from(i != 0)]).collect();
                (base, Arc::new(rel))
            }
            Some((a, b)) => {
                let (ka, la) = self.domain(a);
                let (kb, lb) = self.domain(b);
                let da = self.d.domain(a).unwrap();
                let dab = self.d.domain(ty).unwrap();
                let space = mono_space(ka.clone(), kb.clone(), DEFAULT_CAP).unwrap();
                let mut tables = Vec::new();
                let mut rel = Vec::new();
                for i in 0..space.len() {
                    let f = space.table_of(i).unwrap();
                    let related: Vec<usize> = (0..dab.len())
                        .filter(|&di| {
                            let h = dab.get(di);
                            (0..ka.len()).all(|g| {
                                la[g].iter().all(|&e| {
                                    let he = apply(&da, h, da.get(e)).unwrap();
                                    let he = self.d.domain(b).unwrap().index_of(&he).unwrap();
                                    lb[f[g] as usize].contains(&he)
                                })
                            })
                        })
                        .collect();
                    if !related.is_empty() {
                        tables.push(f.to_vec().into_boxed_slice());
                        rel.push(related);
                    }
                }
                let poset = FinPoset::from_tables(ty.clone(), ka, kb, tables.clone());
                let mut sorted = vec![Vec::new(); rel.len()];
                for (t, r) in tables.iter().zip(rel) {
                    sorted[poset.index_of_table(t).unwrap()] = r;
                }
                (Arc::new(poset), Arc::new(sorted))
            }
        };
        self.cache.lock().unwrap().insert(ty.clone(), out.clone());
        out
    }

    /// `⋁ L_d` for the `D` element with index `di`, by search in the brute domain.
    pub fn join_of_fiber(&self, ty: &SimpleType, di: usize) -> Option<usize> {
        let (dom, rel) = self.domain(ty);
        let fiber: Vec<usize> = (0..dom.len()).filter(|&i| rel[i].contains(&di)).collect();
        let mut acc = *fiber.first()?;
        for &i in &fiber[1..] {
            acc = dom.join_by_search(acc, i)?;
        }
        Some(acc)
    }

    /// `h↑` by the co-step formula `⋀_e (⋁L_e ↘ ⋁L_{h(e)})`.
    pub fn uparrow_costep(&self, a: &SimpleType, b: &SimpleType, h: usize) -> SemValue {
        let ty = arrow(a.clone(), b.clone());
        let (ka, _) = self.domain(a);
        let (kb, _) = self.domain(b);
        let (kab, _) = self.domain(&ty);
        let da = self.d.domain(a).unwrap();
        let db = self.d.domain(b).unwrap();
        let dab = self.d.domain(&ty).unwrap();
        let top_b = kb.top().expect("K has a top");
        let mut acc: Option<usize> = None;
        for e in 0..da.len() {
            let he = apply(&da, dab.get(h), da.get(e)).unwrap();
            let he = db.index_of(&he).unwrap();
            let le = self.join_of_fiber(a, e).expect("L_e is not empty");
            let lhe = self.join_of_fiber(b, he).expect("L_h(e) is not empty");
            let table: Vec<u32> = (0..ka.len())
                .map(|p| {
                    if ka.leq(p, le) {
                        lhe as u32
                    } else {
                        top_b as u32
                    }
                })
                .collect();
            let f = kab
                .index_of_table(&table)
                .expect("co-step function lies in K");
            acc = Some(match acc {
                None => f,
                Some(g) => kab.meet_by_search(g, f).expect("meet exists"),
            });
        }
        kab.get(acc.expect("D is not empty")).clone()
    }
}

/// `D` index of every element of a fiber-enumerated `K` domain, via the model.
pub fn bar_indices(k: &KModel, ty: &SimpleType) -> Vec<usize> {
    k.bar_table(ty)
        .unwrap()
        .iter()
        .map(|&b| b as usize)
        .collect()
}
