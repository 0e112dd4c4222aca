pub mod automata;
pub mod cli;
pub mod domains;
pub mod error;
pub mod gfp;
pub mod kmodel;
pub mod reduction;
pub mod reflection;
pub mod scheme;
pub mod syntax;
pub mod tree;

pub use automata::{accepts_bt, CutPolicy, ExampleAutomaton, PrefixVerdict, TacAutomaton};
pub use domains::{eval, eval_closed, FinPoset, Model, SemValue};
pub use error::{Error, Result};
pub use gfp::{build_gfp, gfp_check, Checked, GfpModel};
pub use kmodel::{divergence_check, k_check, DModel, KModel, KValue};
pub use reduction::{abt, bohm_truncate, head_normalize, head_redex_step, HeadResult};
pub use reflection::{rbt_truncate, reflect, reflect_opt, type_bullet, ReflectOptions};
pub use syntax::{parse_program, parse_term, parse_type, Signature, SimpleType, Term};
pub use tree::{Label, LabeledTree};
