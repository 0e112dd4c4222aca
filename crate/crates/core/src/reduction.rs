//! βδ-reduction, head reduction and Böhm tree truncations.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::domains::{eval_closed, SemValue};
use crate::error::{Error, Result};
use crate::kmodel::{check_closed_base, DModel};
use crate::syntax::{Name, SimpleType, Term};
use crate::tree::{Label, LabeledTree};

/// Default bound on head steps when no divergence oracle applies.
pub const DEFAULT_FUEL: usize = 100_000;

/// Contracts the redex at the root of `t`, if `t` is one: `(λx.P) Q`, `Y M`
/// or `case #k {...}`.
pub fn contract(t: &Term) -> Result<Option<Term>> {
    match t {
        Term::App(f, a) => match &**f {
            Term::Abs { var, body, .. } => Ok(Some(body.substitute_one(var, a)?)),
            Term::Fix(_) => Ok(Some(Term::app((**a).clone(), t.clone()))),
            _ => Ok(None),
        },
        Term::Case {
            scrutinee,
            branches,
        } => match &**scrutinee {
            Term::Elem { index, .. } => Ok(branches.get(*index).cloned()),
            _ => Ok(None),
        },
        _ => Ok(None),
    }
}

/// Selects the branch of `case #k {...}`.
pub fn case_reduce(t: &Term) -> Result<Term> {
    match t {
        Term::Case {
            scrutinee,
            branches,
        } => match &**scrutinee {
            Term::Elem { index, .. } => branches
                .get(*index)
                .cloned()
                .ok_or_else(|| Error::Internal(format!("case has no branch #{index}"))),
            other => Err(Error::StuckCase(other.to_string())),
        },
        other => Err(Error::StuckCase(other.to_string())),
    }
}

/// One head reduction step, or `None` when `t` is in head normal form.
pub fn head_redex_step(t: &Term) -> Result<Option<Term>> {
    if let Term::Abs { var, var_ty, body } = t {
        return Ok(head_redex_step(body)?.map(|b| Term::Abs {
            var: var.clone(),
            var_ty: var_ty.clone(),
            body: Arc::new(b),
        }));
    }
    let (head, args) = t.spine();
    let rebuild = |h: Term, rest: &[&Term]| Term::apps(h, rest.iter().map(|a| (*a).clone()));
    match head {
        Term::Abs { var, body, .. } if !args.is_empty() => {
            let r = body.substitute_one(var, args[0])?;
            Ok(Some(rebuild(r, &args[1..])))
        }
        Term::Fix(_) if !args.is_empty() => {
            let yr = Term::app(head.clone(), args[0].clone());
            let r = Term::app(args[0].clone(), yr);
            Ok(Some(rebuild(r, &args[1..])))
        }
        Term::Case {
            scrutinee,
            branches,
        } => match &**scrutinee {
            Term::Elem { index, .. } => {
                let b = branches
                    .get(*index)
                    .cloned()
                    .ok_or_else(|| Error::Internal(format!("case has no branch #{index}")))?;
                Ok(Some(rebuild(b, &args)))
            }
            s => match head_redex_step(s)? {
                Some(s2) => {
                    let c = Term::Case {
                        scrutinee: Arc::new(s2),
                        branches: branches.clone(),
                    };
                    Ok(Some(rebuild(c, &args)))
                }
                None => Ok(None),
            },
        },
        _ => Ok(None),
    }
}

/// Sizes of the tagged types of `t`: the number of `case` branches, or one
/// more than the largest element index when no `case` inspects the tag.
pub fn tag_sizes(t: &Term) -> BTreeMap<SimpleType, usize> {
    fn note_type(ty: &SimpleType, out: &mut BTreeMap<SimpleType, usize>) {
        match ty {
            SimpleType::Base => {}
            SimpleType::Tag(of) => {
                out.entry((**of).clone()).or_insert(1);
                note_type(of, out);
            }
            SimpleType::Arrow(a, b) => {
                note_type(a, out);
                note_type(b, out);
            }
        }
    }
    fn go(
        t: &Term,
        cased: &mut BTreeMap<SimpleType, usize>,
        out: &mut BTreeMap<SimpleType, usize>,
    ) {
        match t {
            Term::Const { ty, .. }
            | Term::Var { ty, .. }
            | Term::Fix(ty)
            | Term::Omega(ty)
            | Term::LittleOmega(ty) => note_type(ty, out),
            Term::Elem { tag, index } => {
                note_type(&SimpleType::tag(tag.clone()), out);
                let e = out.entry(tag.clone()).or_insert(0);
                *e = (*e).max(index + 1);
            }
            Term::Abs { var_ty, body, .. } => {
                note_type(var_ty, out);
                go(body, cased, out);
            }
            Term::App(f, a) => {
                go(f, cased, out);
                go(a, cased, out);
            }
            Term::Case {
                scrutinee,
                branches,
            } => {
                if let Ok(SimpleType::Tag(of)) = scrutinee.type_of() {
                    let e = cased.entry((*of).clone()).or_insert(0);
                    *e = (*e).max(branches.len());
                }
                go(scrutinee, cased, out);
                for b in branches.iter() {
                    go(b, cased, out);
                }
            }
        }
    }
    let mut cased = BTreeMap::new();
    let mut out = BTreeMap::new();
    go(t, &mut cased, &mut out);
    for (ty, k) in cased {
        out.insert(ty, k);
    }
    out
}

/// The divergence oracle for `t`: the model `D` interpreting the tagged types
/// of `t` and treating cuts as constants.
pub fn oracle_for(t: &Term) -> DModel {
    DModel::with_tags(tag_sizes(t)).with_cut_as_constant()
}

/// Result of head normalisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeadResult {
    Hnf {
        binders: Vec<(Name, SimpleType)>,
        head: Term,
        args: Vec<Term>,
        steps: usize,
    },
    Diverged,
    FuelExhausted(usize),
}

/// Splits a head normal form into its λ-prefix, head and arguments.
pub fn decompose(t: &Term) -> (Vec<(Name, SimpleType)>, Term, Vec<Term>) {
    let mut binders = Vec::new();
    let mut cur = t;
    while let Term::Abs { var, var_ty, body } = cur {
        binders.push((var.clone(), var_ty.clone()));
        cur = body;
    }
    let (h, args) = cur.spine();
    (binders, h.clone(), args.into_iter().cloned().collect())
}

/// Head-reduces `t`. With a `D` oracle and a closed term of type `o`,
/// divergence is decided up front and no fuel is needed; otherwise at most
/// `fuel` steps are taken.
pub fn head_normalize(
    t: &Term,
    fuel: Option<usize>,
    oracle: Option<&DModel>,
) -> Result<HeadResult> {
    let decided = match oracle {
        Some(d) if t.is_closed() && t.type_of()? == SimpleType::Base => {
            if eval_closed(t, d)? == SemValue::Base(0) {
                return Ok(HeadResult::Diverged);
            }
            true
        }
        _ => false,
    };
    let fuel = fuel.unwrap_or(DEFAULT_FUEL);
    let mut cur = t.clone();
    let mut steps = 0;
    loop {
        match head_redex_step(&cur)? {
            None => {
                let (binders, head, args) = decompose(&cur);
                return Ok(HeadResult::Hnf {
                    binders,
                    head,
                    args,
                    steps,
                });
            }
            Some(next) => {
                steps += 1;
                if !decided && steps > fuel {
                    return Ok(HeadResult::FuelExhausted(fuel));
                }
                cur = next;
            }
        }
    }
}

/// Expands the Böhm tree of a closed term of type `o` to depth `depth`,
/// optionally annotating every non-`Ω` node with the result of `annotate` on
/// its subterm.
pub fn expand_bohm(
    t: &Term,
    depth: usize,
    annotate: &mut dyn FnMut(&str, &Term) -> Result<Option<usize>>,
) -> Result<LabeledTree> {
    check_closed_base(t)?;
    let oracle = oracle_for(t);
    let mut addr = String::new();
    expand_node(t, depth, &oracle, &mut addr, annotate)
}

fn expand_node(
    t: &Term,
    depth: usize,
    oracle: &DModel,
    addr: &mut String,
    annotate: &mut dyn FnMut(&str, &Term) -> Result<Option<usize>>,
) -> Result<LabeledTree> {
    if depth == 0 {
        return Ok(LabeledTree::cut());
    }
    let (head, args) = match head_normalize(t, None, Some(oracle))? {
        HeadResult::Diverged => return Ok(LabeledTree::omega()),
        HeadResult::FuelExhausted(n) => return Err(Error::FuelExhausted(n)),
        HeadResult::Hnf { head, args, .. } => (head, args),
    };
    let label = match &head {
        Term::Omega(_) => return Ok(LabeledTree::omega()),
        Term::LittleOmega(_) => return Ok(LabeledTree::cut()),
        Term::Const {
            name,
            ty,
            annotation,
        } => {
            if !(ty.is_base() || *ty == SimpleType::binary()) || args.len() != ty.arity() {
                return Err(Error::NotTreeSignature(format!("{name} : {ty}")));
            }
            let hnf = Term::apps(head.clone(), args.iter().cloned());
            match annotate(addr, &hnf)?.or(*annotation) {
                Some(k) => Label::Annotated(name.to_string(), k),
                None => Label::Const(name.to_string()),
            }
        }
        other => {
            return Err(Error::Internal(format!(
                "closed term of type o has head normal form headed by `{other}`"
            )))
        }
    };
    let mut children = Vec::with_capacity(args.len());
    for (i, a) in args.iter().enumerate() {
        addr.push(if i == 0 { '1' } else { '2' });
        let c = expand_node(a, depth - 1, oracle, addr, annotate);
        addr.pop();
        children.push(c?);
    }
    Ok(LabeledTree { label, children })
}

/// `BT(t)↓depth` for a closed term of type `o` over a tree signature.
pub fn bohm_truncate(t: &Term, depth: usize) -> Result<LabeledTree> {
    expand_bohm(t, depth, &mut |_, _| Ok(None))
}

/// Böhm tree prefix computed by fuel-bounded head reduction alone, without the
/// divergence oracle. Nodes whose head normalisation runs out of fuel become `Ω`.
pub fn bohm_truncate_by_fuel(t: &Term, depth: usize, fuel: usize) -> Result<(LabeledTree, bool)> {
    fn go(t: &Term, depth: usize, fuel: usize, committed: &mut bool) -> Result<LabeledTree> {
        if depth == 0 {
            return Ok(LabeledTree::cut());
        }
        match head_normalize(t, Some(fuel), None)? {
            HeadResult::Hnf { head, args, .. } => match &head {
                Term::Omega(_) => Ok(LabeledTree::omega()),
                Term::LittleOmega(_) => Ok(LabeledTree::cut()),
                Term::Const {
                    name, annotation, ..
                } => {
                    let children = args
                        .iter()
                        .map(|a| go(a, depth - 1, fuel, committed))
                        .collect::<Result<Vec<_>>>()?;
                    let label = match annotation {
                        Some(k) => Label::Annotated(name.to_string(), *k),
                        None => Label::Const(name.to_string()),
                    };
                    Ok(LabeledTree { label, children })
                }
                other => Err(Error::Internal(format!("unexpected head `{other}`"))),
            },
            _ => {
                *committed = false;
                Ok(LabeledTree::omega())
            }
        }
    }
    check_closed_base(t)?;
    let mut committed = true;
    let tree = go(t, depth, fuel, &mut committed)?;
    Ok((tree, committed))
}

/// `ABT_l(t)`: head-normalises and recurses into the arguments up to depth `l`.
/// Subterms without a head normal form, or whose normalisation exceeds the
/// fuel, are kept as they are. The result is βδ-convertible to `t`.
pub fn abt(t: &Term, l: usize, fuel: Option<usize>) -> Result<Term> {
    abt_with(t, l, fuel, &oracle_for(t))
}

fn abt_with(t: &Term, l: usize, fuel: Option<usize>, oracle: &DModel) -> Result<Term> {
    if l == 0 {
        return Ok(t.clone());
    }
    match head_normalize(t, fuel, Some(oracle))? {
        HeadResult::Hnf {
            binders,
            head,
            args,
            ..
        } => {
            let args = args
                .iter()
                .map(|a| abt_with(a, l - 1, fuel, oracle))
                .collect::<Result<Vec<_>>>()?;
            let body = Term::apps(head, args);
            Ok(binders
                .into_iter()
                .rev()
                .fold(body, |b, (x, ty)| Term::Abs {
                    var: x,
                    var_ty: ty,
                    body: Arc::new(b),
                }))
        }
        HeadResult::Diverged | HeadResult::FuelExhausted(_) => Ok(t.clone()),
    }
}

/// Position of a subterm: child indices from the root. For `App` 0 is the
/// function and 1 the argument; for `Abs` 0 is the body; for `case` 0 is the
/// scrutinee and `1 + i` the `i`-th branch.
pub type Path = Vec<usize>;

/// Positions of all βδ and case redexes, in preorder.
pub fn redexes(t: &Term) -> Vec<Path> {
    fn go(t: &Term, path: &mut Path, out: &mut Vec<Path>) {
        let is_redex = match t {
            Term::App(f, _) => matches!(&**f, Term::Abs { .. } | Term::Fix(_)),
            Term::Case { scrutinee, .. } => matches!(&**scrutinee, Term::Elem { .. }),
            _ => false,
        };
        if is_redex {
            out.push(path.clone());
        }
        let children: Vec<&Term> = match t {
            Term::Abs { body, .. } => vec![body],
            Term::App(f, a) => vec![f, a],
            Term::Case {
                scrutinee,
                branches,
            } => std::iter::once(&**scrutinee)
                .chain(branches.iter())
                .collect(),
            _ => vec![],
        };
        for (i, c) in children.into_iter().enumerate() {
            path.push(i);
            go(c, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Contracts the redex at `path`.
pub fn reduce_at(t: &Term, path: &[usize]) -> Result<Term> {
    let Some((&i, rest)) = path.split_first() else {
        return contract(t)?.ok_or_else(|| Error::Internal(format!("no redex at `{t}`")));
    };
    let bad = || Error::Internal(format!("path component {i} does not exist in `{t}`"));
    Ok(match t {
        Term::Abs { var, var_ty, body } if i == 0 => Term::Abs {
            var: var.clone(),
            var_ty: var_ty.clone(),
            body: Arc::new(reduce_at(body, rest)?),
        },
        Term::App(f, a) if i == 0 => Term::App(Arc::new(reduce_at(f, rest)?), a.clone()),
        Term::App(f, a) if i == 1 => Term::App(f.clone(), Arc::new(reduce_at(a, rest)?)),
        Term::Case {
            scrutinee,
            branches,
        } => {
            if i == 0 {
                Term::Case {
                    scrutinee: Arc::new(reduce_at(scrutinee, rest)?),
                    branches: branches.clone(),
                }
            } else {
                let mut bs: Vec<Term> = branches.to_vec();
                let b = bs.get_mut(i - 1).ok_or_else(bad)?;
                *b = reduce_at(b, rest)?;
                Term::Case {
                    scrutinee: scrutinee.clone(),
                    branches: bs.into(),
                }
            }
        }
        _ => return Err(bad()),
    })
}
