//! Finite posets, monotone function spaces, models and evaluation.

mod eval;
mod model;
mod poset;

pub use eval::{eval, eval_closed};
pub use model::{
    apply, chain_bound, constant_function, full_domain, iterate_to_fixpoint, kleene_gfp,
    kleene_lfp, tabulate, DomainCache, Model,
};
pub use poset::{
    for_each_monotone, mono_space, monotone_tables, FinPoset, SemValue, DEFAULT_CAP,
    ORDER_MATRIX_LIMIT,
};
