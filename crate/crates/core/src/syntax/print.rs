use std::fmt;

use super::term::Term;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, Prec::Top, f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Top,
    /// Function position of an application.
    Fun,
    /// Argument position: only atoms print without parentheses.
    Arg,
}

fn write_term(t: &Term, prec: Prec, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Const {
            name,
            annotation: None,
            ..
        } => write!(f, "{name}"),
        Term::Const {
            name,
            annotation: Some(k),
            ..
        } => write!(f, "{name}^{{#{k}}}"),
        Term::Var { name, .. } => write!(f, "{name}"),
        Term::Fix(a) => write!(f, "Y:{}", a.atomic_string()),
        Term::Omega(a) => write!(f, "Omega:{}", a.atomic_string()),
        Term::LittleOmega(a) => write!(f, "omega:{}", a.atomic_string()),
        Term::Elem { tag, index } => write!(f, "#{index}:[{tag}]"),
        Term::Abs { .. } => {
            if prec > Prec::Top {
                write!(f, "(")?;
            }
            let mut cur = t;
            write!(f, "\\")?;
            let mut first = true;
            while let Term::Abs { var, var_ty, body } = cur {
                if !first {
                    write!(f, " ")?;
                }
                first = false;
                write!(f, "{var}:{}", var_ty.atomic_string())?;
                cur = body;
            }
            write!(f, ". ")?;
            write_term(cur, Prec::Top, f)?;
            if prec > Prec::Top {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::App(fun, arg) => {
            if prec == Prec::Arg {
                write!(f, "(")?;
            }
            match (&**fun, &**arg) {
                // `Y M` lets the parser recover the fixpoint type from `M`.
                (Term::Fix(_), _) => write!(f, "Y ")?,
                _ => {
                    write_term(fun, Prec::Fun, f)?;
                    write!(f, " ")?;
                }
            }
            write_term(arg, Prec::Arg, f)?;
            if prec == Prec::Arg {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Case {
            scrutinee,
            branches,
        } => {
            if prec > Prec::Top {
                write!(f, "(")?;
            }
            write!(f, "case ")?;
            write_term(scrutinee, Prec::Fun, f)?;
            write!(f, " {{ ")?;
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "#{i} -> ")?;
                write_term(b, Prec::Top, f)?;
            }
            write!(f, " }}")?;
            if prec > Prec::Top {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}
