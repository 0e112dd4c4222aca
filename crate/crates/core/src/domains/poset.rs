use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::syntax::SimpleType;

/// An element of a finite model at some type: an index into the base poset,
/// or a total table indexed by the canonical enumeration of the argument domain.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemValue {
    Base(u32),
    Fun(Arc<[SemValue]>),
}

impl SemValue {
    pub fn base_index(&self) -> Option<usize> {
        match self {
            SemValue::Base(i) => Some(*i as usize),
            SemValue::Fun(_) => None,
        }
    }

    pub fn table(&self) -> Option<&[SemValue]> {
        match self {
            SemValue::Fun(t) => Some(t),
            SemValue::Base(_) => None,
        }
    }

    /// Constant table of length `n`.
    pub fn constant(n: usize, v: SemValue) -> SemValue {
        SemValue::Fun(vec![v; n].into())
    }
}

impl fmt::Debug for SemValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemValue::Base(i) => write!(f, "#{i}"),
            SemValue::Fun(t) => f.debug_list().entries(t.iter()).finish(),
        }
    }
}

/// Domains with more elements than this get no precomputed order matrix.
pub const ORDER_MATRIX_LIMIT: usize = 8192;

/// Default cap on enumerated function spaces.
pub const DEFAULT_CAP: usize = 2_000_000;

enum Shape {
    Base {
        labels: Vec<String>,
        leq: Vec<FixedBitSet>,
    },
    Fun {
        dom: Arc<FinPoset>,
        cod: Arc<FinPoset>,
        index: HashMap<Box<[u32]>, u32>,
        tables: Vec<Box<[u32]>>,
    },
}

struct Order {
    /// `up[i]` = { j | i ≤ j }
    up: Vec<FixedBitSet>,
    /// Lower covers of each element.
    covers: Vec<Vec<u32>>,
}

/// A finite poset of semantic values at one type. Elements are listed in a
/// canonical order that is a linear extension of the partial order.
pub struct FinPoset {
    ty: SimpleType,
    elems: Vec<SemValue>,
    shape: Shape,
    order: OnceLock<Order>,
    top: OnceLock<Option<u32>>,
    bottom: OnceLock<Option<u32>>,
}

impl fmt::Debug for FinPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinPoset({} : {} elements)", self.ty, self.elems.len())
    }
}

impl FinPoset {
    /// A base poset listed in the given order, which must be a linear
    /// extension of `leq`. The order axioms are checked.
    pub fn base<F>(ty: SimpleType, labels: Vec<String>, leq: F) -> Result<FinPoset>
    where
        F: Fn(usize, usize) -> bool,
    {
        let n = labels.len();
        let mut rows = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in rows.iter_mut().enumerate() {
            for j in 0..n {
                if leq(i, j) {
                    row.insert(j);
                }
            }
        }
        for i in 0..n {
            if !rows[i].contains(i) {
                return Err(Error::Internal(format!(
                    "order on {ty} is not reflexive at {}",
                    labels[i]
                )));
            }
            for j in 0..n {
                if i != j && rows[i].contains(j) {
                    if rows[j].contains(i) {
                        return Err(Error::Internal(format!(
                            "order on {ty} is not antisymmetric"
                        )));
                    }
                    if j < i {
                        return Err(Error::Internal(format!(
                            "listing of {ty} is not a linear extension: {} ≤ {}",
                            labels[i], labels[j]
                        )));
                    }
                    if !rows[j].is_subset(&rows[i]) {
                        return Err(Error::Internal(format!("order on {ty} is not transitive")));
                    }
                }
            }
        }
        let elems = (0..n as u32).map(SemValue::Base).collect();
        Ok(FinPoset {
            ty,
            elems,
            shape: Shape::Base { labels, leq: rows },
            order: OnceLock::new(),
            top: OnceLock::new(),
            bottom: OnceLock::new(),
        })
    }

    /// A chain `0 < 1 < ... < n-1`.
    pub fn chain(ty: SimpleType, labels: Vec<String>) -> FinPoset {
        FinPoset::base(ty, labels, |i, j| i <= j).expect("a chain is a poset")
    }

    /// A function poset from tables of codomain indices. Tables are sorted into
    /// a linear extension of the pointwise order.
    pub fn from_tables(
        ty: SimpleType,
        dom: Arc<FinPoset>,
        cod: Arc<FinPoset>,
        mut tables: Vec<Box<[u32]>>,
    ) -> FinPoset {
        // Canonical indices are a linear extension of the codomain order, so
        // their sum is strictly monotone in the pointwise order.
        tables.sort_by_key(|t| t.iter().map(|&x| x as u64).sum::<u64>());
        let index = tables
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let elems = tables
            .iter()
            .map(|t| SemValue::Fun(t.iter().map(|&k| cod.elems[k as usize].clone()).collect()))
            .collect();
        FinPoset {
            ty,
            elems,
            shape: Shape::Fun {
                dom,
                cod,
                index,
                tables,
            },
            order: OnceLock::new(),
            top: OnceLock::new(),
            bottom: OnceLock::new(),
        }
    }

    pub fn ty(&self) -> &SimpleType {
        &self.ty
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[SemValue] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> &SemValue {
        &self.elems[i]
    }

    pub fn is_base(&self) -> bool {
        matches!(self.shape, Shape::Base { .. })
    }

    /// Argument and result posets of a function poset.
    pub fn dom_cod(&self) -> Option<(&Arc<FinPoset>, &Arc<FinPoset>)> {
        match &self.shape {
            Shape::Fun { dom, cod, .. } => Some((dom, cod)),
            Shape::Base { .. } => None,
        }
    }

    pub fn label(&self, i: usize) -> String {
        match &self.shape {
            Shape::Base { labels, .. } => labels[i].clone(),
            Shape::Fun { tables, .. } => {
                let parts: Vec<String> = tables[i].iter().map(|k| format!("#{k}")).collect();
                format!("<{}>", parts.join(", "))
            }
        }
    }

    /// Codomain indices of a function element.
    pub fn table_of(&self, i: usize) -> Option<&[u32]> {
        match &self.shape {
            Shape::Fun { tables, .. } => Some(&tables[i]),
            Shape::Base { .. } => None,
        }
    }

    pub fn index_of(&self, v: &SemValue) -> Option<usize> {
        match (&self.shape, v) {
            (Shape::Base { .. }, SemValue::Base(k)) => {
                ((*k as usize) < self.elems.len()).then_some(*k as usize)
            }
            (
                Shape::Fun {
                    dom, cod, index, ..
                },
                SemValue::Fun(t),
            ) => {
                if t.len() != dom.len() {
                    return None;
                }
                let key = t
                    .iter()
                    .map(|e| cod.index_of(e).map(|k| k as u32))
                    .collect::<Option<Box<[u32]>>>()?;
                index.get(&key).map(|&k| k as usize)
            }
            _ => None,
        }
    }

    pub fn index_of_table(&self, t: &[u32]) -> Option<usize> {
        match &self.shape {
            Shape::Fun { index, .. } => index.get(t).map(|&k| k as usize),
            Shape::Base { .. } => None,
        }
    }

    pub fn contains(&self, v: &SemValue) -> bool {
        self.index_of(v).is_some()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        if j < i {
            return false;
        }
        if let Some(o) = self.order.get() {
            return o.up[i].contains(j);
        }
        match &self.shape {
            Shape::Base { leq, .. } => leq[i].contains(j),
            Shape::Fun { cod, tables, .. } => tables[i]
                .iter()
                .zip(tables[j].iter())
                .all(|(&a, &b)| cod.leq(a as usize, b as usize)),
        }
    }

    /// Order on values of this poset's type, which need not be enumerated members.
    pub fn leq_values(&self, a: &SemValue, b: &SemValue) -> bool {
        match (&self.shape, a, b) {
            (Shape::Base { leq, .. }, SemValue::Base(x), SemValue::Base(y)) => {
                leq[*x as usize].contains(*y as usize)
            }
            (Shape::Fun { cod, .. }, SemValue::Fun(s), SemValue::Fun(t)) => {
                s.len() == t.len() && s.iter().zip(t.iter()).all(|(x, y)| cod.leq_values(x, y))
            }
            _ => false,
        }
    }

    fn order(&self) -> Result<&Order> {
        if let Some(o) = self.order.get() {
            return Ok(o);
        }
        let n = self.len();
        if n > ORDER_MATRIX_LIMIT {
            return Err(Error::SpaceTooLarge {
                ty: format!("order of {}", self.ty),
                cap: ORDER_MATRIX_LIMIT,
            });
        }
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in up.iter_mut().enumerate() {
            for j in i..n {
                if self.leq(i, j) {
                    row.insert(j);
                }
            }
        }
        let mut covers = vec![Vec::new(); n];
        for (i, cov) in covers.iter_mut().enumerate() {
            // j < i is a cover iff no k strictly between.
            for j in (0..i).rev() {
                if up[j].contains(i) {
                    let between = cov.iter().any(|&k: &u32| up[j].contains(k as usize));
                    if !between {
                        cov.push(j as u32);
                    }
                }
            }
            cov.reverse();
        }
        let _ = self.order.set(Order { up, covers });
        Ok(self.order.get().expect("just set"))
    }

    /// Lower covers of element `i` (its Hasse predecessors).
    pub fn covers(&self, i: usize) -> Result<&[u32]> {
        Ok(&self.order()?.covers[i])
    }

    /// Hasse edges `(lower, upper)` sorted by upper then lower.
    pub fn hasse_edges(&self) -> Result<Vec<(usize, usize)>> {
        let o = self.order()?;
        let mut out = Vec::new();
        for (i, cs) in o.covers.iter().enumerate() {
            for &j in cs {
                out.push((j as usize, i));
            }
        }
        Ok(out)
    }

    /// Up-set of `i` as a bitset over canonical indices.
    pub fn up_set(&self, i: usize) -> Result<&FixedBitSet> {
        Ok(&self.order()?.up[i])
    }

    pub fn top(&self) -> Option<usize> {
        let t = *self.top.get_or_init(|| match &self.shape {
            Shape::Base { .. } => (0..self.len())
                .find(|&i| (0..self.len()).all(|j| self.leq(j, i)))
                .map(|i| i as u32),
            Shape::Fun { dom, cod, .. } => cod
                .top()
                .and_then(|t| self.index_of_table(&vec![t as u32; dom.len()]))
                .map(|i| i as u32),
        });
        t.map(|i| i as usize)
    }

    pub fn bottom(&self) -> Option<usize> {
        let b = *self.bottom.get_or_init(|| match &self.shape {
            Shape::Base { .. } => (0..self.len())
                .find(|&i| (0..self.len()).all(|j| self.leq(i, j)))
                .map(|i| i as u32),
            Shape::Fun { dom, cod, .. } => cod
                .bottom()
                .and_then(|b| self.index_of_table(&vec![b as u32; dom.len()]))
                .map(|i| i as u32),
        });
        b.map(|i| i as usize)
    }

    /// Least upper bound, if it exists. For function posets the join is taken
    /// pointwise and must itself be a member.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        self.bound(i, j, true)
    }

    /// Greatest lower bound, if it exists.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        self.bound(i, j, false)
    }

    fn bound(&self, i: usize, j: usize, upper: bool) -> Option<usize> {
        match &self.shape {
            Shape::Base { .. } => {
                let n = self.len();
                let bounds: Vec<usize> = (0..n)
                    .filter(|&k| {
                        if upper {
                            self.leq(i, k) && self.leq(j, k)
                        } else {
                            self.leq(k, i) && self.leq(k, j)
                        }
                    })
                    .collect();
                bounds.iter().copied().find(|&k| {
                    bounds.iter().all(|&l| {
                        if upper {
                            self.leq(k, l)
                        } else {
                            self.leq(l, k)
                        }
                    })
                })
            }
            Shape::Fun { cod, tables, .. } => {
                let t: Option<Box<[u32]>> = tables[i]
                    .iter()
                    .zip(tables[j].iter())
                    .map(|(&a, &b)| cod.bound(a as usize, b as usize, upper).map(|k| k as u32))
                    .collect();
                self.index_of_table(&t?)
            }
        }
    }

    /// Least upper bound by exhaustive search over the enumerated elements.
    pub fn join_by_search(&self, i: usize, j: usize) -> Option<usize> {
        let ub: Vec<usize> = (0..self.len())
            .filter(|&k| self.leq(i, k) && self.leq(j, k))
            .collect();
        ub.iter()
            .copied()
            .find(|&k| ub.iter().all(|&l| self.leq(k, l)))
    }

    /// Greatest lower bound by exhaustive search over the enumerated elements.
    pub fn meet_by_search(&self, i: usize, j: usize) -> Option<usize> {
        let lb: Vec<usize> = (0..self.len())
            .filter(|&k| self.leq(k, i) && self.leq(k, j))
            .collect();
        lb.iter()
            .copied()
            .find(|&k| lb.iter().all(|&l| self.leq(l, k)))
    }

    /// Textual dump: one element per line, then the Hasse edges.
    pub fn dump(&self, label: &dyn Fn(usize) -> String) -> Result<String> {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "type {}", self.ty);
        let _ = writeln!(s, "elements {}", self.len());
        for i in 0..self.len() {
            let _ = writeln!(s, "  #{i} {}", label(i));
        }
        let edges = self.hasse_edges()?;
        let _ = writeln!(s, "hasse {}", edges.len());
        for (a, b) in edges {
            let _ = writeln!(s, "  #{a} < #{b}");
        }
        Ok(s)
    }
}

/// Visits every monotone map from `dom` to `cod` whose value at each argument
/// index `i` lies in `allowed(i)` (all of `cod` when `None`), as a table of
/// codomain indices, in lexicographic order. The visitor returns `false` to stop.
pub fn for_each_monotone(
    dom: &FinPoset,
    cod: &FinPoset,
    allowed: Option<&dyn Fn(usize) -> FixedBitSet>,
    visit: &mut dyn FnMut(&[u32]) -> Result<bool>,
) -> Result<()> {
    let n = dom.len();
    let m = cod.len();
    let covers: Vec<Vec<u32>> = (0..n)
        .map(|i| dom.covers(i).map(|c| c.to_vec()))
        .collect::<Result<_>>()?;
    let ups: Vec<&FixedBitSet> = (0..m).map(|k| cod.up_set(k)).collect::<Result<_>>()?;
    let allowed_sets: Vec<FixedBitSet> = (0..n)
        .map(|i| match allowed {
            Some(a) => a(i),
            None => {
                let mut all = FixedBitSet::with_capacity(m);
                all.insert_range(..);
                all
            }
        })
        .collect();
    if n == 0 {
        visit(&[])?;
        return Ok(());
    }
    let candidates = |i: usize, cur: &[u32]| -> Vec<u32> {
        let mut s = allowed_sets[i].clone();
        for &j in &covers[i] {
            s.intersect_with(ups[cur[j as usize] as usize]);
        }
        let mut v: Vec<u32> = s.ones().map(|k| k as u32).collect();
        v.reverse();
        v
    };
    let mut cur = vec![0u32; n];
    // Explicit stack of remaining candidates per position.
    let mut cands: Vec<Vec<u32>> = Vec::with_capacity(n);
    cands.push(candidates(0, &cur));
    while !cands.is_empty() {
        let i = cands.len() - 1;
        match cands[i].pop() {
            None => {
                cands.pop();
            }
            Some(c) => {
                cur[i] = c;
                if i + 1 == n {
                    if !visit(&cur)? {
                        return Ok(());
                    }
                } else {
                    let next = candidates(i + 1, &cur);
                    cands.push(next);
                }
            }
        }
    }
    Ok(())
}

/// Collects the tables visited by [`for_each_monotone`], failing with
/// `SpaceTooLarge` once more than `cap` are found.
pub fn monotone_tables(
    dom: &FinPoset,
    cod: &FinPoset,
    allowed: Option<&dyn Fn(usize) -> FixedBitSet>,
    cap: usize,
    ty: &SimpleType,
) -> Result<Vec<Box<[u32]>>> {
    let mut out: Vec<Box<[u32]>> = Vec::new();
    let mut over = false;
    for_each_monotone(dom, cod, allowed, &mut |t| {
        if out.len() >= cap {
            over = true;
            return Ok(false);
        }
        out.push(t.into());
        Ok(true)
    })?;
    if over {
        return Err(Error::SpaceTooLarge {
            ty: ty.to_string(),
            cap,
        });
    }
    Ok(out)
}

/// The poset of all monotone maps from `dom` to `cod`, ordered pointwise.
pub fn mono_space(dom: Arc<FinPoset>, cod: Arc<FinPoset>, cap: usize) -> Result<FinPoset> {
    let ty = SimpleType::arrow(dom.ty().clone(), cod.ty().clone());
    let tables = monotone_tables(&dom, &cod, None, cap, &ty)?;
    Ok(FinPoset::from_tables(ty, dom, cod, tables))
}
