use std::sync::{Arc, OnceLock};

use super::model::{apply, Model};
use super::poset::SemValue;
use crate::error::{Error, Result};
use crate::syntax::{Name, SimpleType, Term};

enum Ir {
    Val(SemValue),
    /// De Bruijn level.
    Var(usize),
    Lam {
        ty: SimpleType,
        body: Arc<Ir>,
    },
    App {
        fun: Box<Ir>,
        arg: Box<Ir>,
        arg_ty: SimpleType,
    },
    /// `Y M` at the given type.
    Fix {
        ty: SimpleType,
        body: Box<Ir>,
    },
    BareFix(SimpleType),
    Case {
        tag: SimpleType,
        ty: SimpleType,
        scrutinee: Box<Ir>,
        branches: Vec<Ir>,
    },
}

#[derive(Clone)]
enum Val {
    Sem(SemValue),
    Clo(Arc<Closure>),
    FixAt(SimpleType),
}

struct Closure {
    ty: SimpleType,
    body: Arc<Ir>,
    env: Vec<Val>,
    table: OnceLock<SemValue>,
}

fn compile(t: &Term, model: &dyn Model, scope: &mut Vec<Name>) -> Result<Ir> {
    Ok(match t {
        Term::Const { name, ty, .. } => Ir::Val(model.constant(name, ty)?),
        Term::Var { name, .. } => {
            let lvl = scope.iter().rposition(|n| n == name).ok_or_else(|| {
                Error::Internal(format!("free variable `{name}` without a value"))
            })?;
            Ir::Var(lvl)
        }
        Term::Omega(ty) => Ir::Val(model.omega(ty)?),
        Term::LittleOmega(ty) => Ir::Val(model.little_omega(ty)?),
        Term::Elem { tag, index } => Ir::Val(model.element(tag, *index)?),
        Term::Fix(a) => Ir::BareFix(a.clone()),
        Term::Abs { var, .. } => {
            let ty = t.type_of()?;
            scope.push(var.clone());
            let body = compile(
                match t {
                    Term::Abs { body, .. } => body,
                    _ => unreachable!(),
                },
                model,
                scope,
            );
            scope.pop();
            Ir::Lam {
                ty,
                body: Arc::new(body?),
            }
        }
        Term::App(f, a) => {
            if let Term::Fix(ty) = &**f {
                Ir::Fix {
                    ty: ty.clone(),
                    body: Box::new(compile(a, model, scope)?),
                }
            } else {
                Ir::App {
                    fun: Box::new(compile(f, model, scope)?),
                    arg: Box::new(compile(a, model, scope)?),
                    arg_ty: a.type_of()?,
                }
            }
        }
        Term::Case {
            scrutinee,
            branches,
        } => {
            let tag = match scrutinee.type_of()? {
                SimpleType::Tag(of) => (*of).clone(),
                other => {
                    return Err(Error::Type {
                        path: "case".into(),
                        msg: format!("scrutinee of type {other}"),
                    })
                }
            };
            Ir::Case {
                tag,
                ty: t.type_of()?,
                scrutinee: Box::new(compile(scrutinee, model, scope)?),
                branches: branches
                    .iter()
                    .map(|b| compile(b, model, scope))
                    .collect::<Result<_>>()?,
            }
        }
    })
}

struct Eval<'m> {
    model: &'m dyn Model,
}

impl Eval<'_> {
    fn eval(&self, ir: &Ir, env: &[Val]) -> Result<Val> {
        match ir {
            Ir::Val(v) => Ok(Val::Sem(v.clone())),
            Ir::Var(l) => Ok(env[*l].clone()),
            Ir::Lam { ty, body } => Ok(Val::Clo(Arc::new(Closure {
                ty: ty.clone(),
                body: body.clone(),
                env: env.to_vec(),
                table: OnceLock::new(),
            }))),
            Ir::App { fun, arg, arg_ty } => {
                let f = self.eval(fun, env)?;
                let x = self.eval(arg, env)?;
                self.apply(&f, x, arg_ty)
            }
            Ir::Fix { ty, body } => {
                let f = self.eval(body, env)?;
                self.fix(ty, &f)
            }
            Ir::BareFix(ty) => Ok(Val::FixAt(ty.clone())),
            Ir::Case {
                tag,
                ty,
                scrutinee,
                branches,
            } => {
                let s = self.eval(scrutinee, env)?;
                let s = self.materialize(&s, &SimpleType::tag(tag.clone()))?;
                match self.model.case_branch(tag, &s)? {
                    Some(i) => {
                        let b = branches.get(i).ok_or_else(|| {
                            Error::Internal(format!("case on [{tag}] has no branch #{i}"))
                        })?;
                        self.eval(b, env)
                    }
                    None => Ok(Val::Sem(self.model.omega(ty)?)),
                }
            }
        }
    }

    fn fix(&self, ty: &SimpleType, f: &Val) -> Result<Val> {
        let v = self.model.fix(ty, &mut |x| {
            let y = self.apply(f, Val::Sem(x.clone()), ty)?;
            self.materialize(&y, ty)
        })?;
        Ok(Val::Sem(v))
    }

    fn apply(&self, f: &Val, x: Val, arg_ty: &SimpleType) -> Result<Val> {
        match f {
            Val::Sem(t) => {
                let x = self.materialize(&x, arg_ty)?;
                Ok(Val::Sem(apply(&*self.model.domain(arg_ty)?, t, &x)?))
            }
            Val::Clo(c) => {
                if let Some(t) = c.table.get() {
                    let x = self.materialize(&x, arg_ty)?;
                    return Ok(Val::Sem(apply(&*self.model.domain(arg_ty)?, t, &x)?));
                }
                let mut env = c.env.clone();
                env.push(x);
                self.eval(&c.body, &env)
            }
            Val::FixAt(a) => self.fix(a, &x),
        }
    }

    fn materialize(&self, v: &Val, ty: &SimpleType) -> Result<SemValue> {
        match v {
            Val::Sem(s) => Ok(s.clone()),
            Val::Clo(c) if c.ty != *ty => Err(Error::Internal(format!(
                "closure of type {} used at {ty}",
                c.ty
            ))),
            Val::Clo(c) => {
                if let Some(t) = c.table.get() {
                    return Ok(t.clone());
                }
                let (a, b) =
                    c.ty.split_arrow()
                        .ok_or_else(|| Error::Internal("closure of base type".into()))?;
                let dom = self.model.domain(a)?;
                let mut out = Vec::with_capacity(dom.len());
                let mut env = c.env.clone();
                for d in dom.elements() {
                    env.push(Val::Sem(d.clone()));
                    let r = self.eval(&c.body, &env)?;
                    env.pop();
                    out.push(self.materialize(&r, b)?);
                }
                let t = SemValue::Fun(out.into());
                self.model.check_member(&c.ty, &t)?;
                let _ = c.table.set(t.clone());
                Ok(t)
            }
            Val::FixAt(a) => {
                let dom = self
                    .model
                    .domain(&SimpleType::arrow(a.clone(), a.clone()))?;
                let mut out = Vec::with_capacity(dom.len());
                for f in dom.elements() {
                    out.push(self.materialize(&self.fix(a, &Val::Sem(f.clone()))?, a)?);
                }
                Ok(SemValue::Fun(out.into()))
            }
        }
    }
}

/// Interprets `t` in `model` under the valuation `env` of its free variables.
pub fn eval(t: &Term, model: &dyn Model, env: &[(Name, SemValue)]) -> Result<SemValue> {
    let mut scope: Vec<Name> = env.iter().map(|(n, _)| n.clone()).collect();
    for (n, _) in t.free_vars() {
        if !scope.contains(&n) {
            return Err(Error::Internal(format!("no value for free variable `{n}`")));
        }
    }
    let ty = t.type_of()?;
    let ir = compile(t, model, &mut scope)?;
    let vals: Vec<Val> = env.iter().map(|(_, v)| Val::Sem(v.clone())).collect();
    let ev = Eval { model };
    let v = ev.eval(&ir, &vals)?;
    ev.materialize(&v, &ty)
}

/// Interprets a closed term.
pub fn eval_closed(t: &Term, model: &dyn Model) -> Result<SemValue> {
    eval(t, model, &[])
}
