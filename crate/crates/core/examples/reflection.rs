//! Reflection: rewriting a term so that its Böhm tree carries model values.
//!
//! ```text
//! cargo run --example reflection
//! ```

use lyc::reflection::{eta_long_constants, rbt_truncate};
use lyc::{bohm_truncate, parse_term, reflect, reflect_opt, KModel, ReflectOptions, Signature};
use lyc::{ExampleAutomaton, TacAutomaton};

fn main() -> lyc::Result<()> {
    let sig = Signature::with_tree(&[("c", 0), ("a", 2)])?;
    let aut = TacAutomaton::example(ExampleAutomaton::NoOmega, &sig)?;
    let k = KModel::new(&aut);
    let t = parse_term("(\\g:o->o. a (g c) (Y (\\x:o. x))) (\\y:o. a y y)", &sig)?;

    let r = reflect(&k, &t, &[])?;
    println!("reflection: {} nodes", r.size());
    println!("its tree:   {}", bohm_truncate(&r, 3)?);
    println!("annotated:  {}", rbt_truncate(&k, &t, 3)?);

    // The optimised translation omits cases on arguments known statically.
    let opt = reflect_opt(
        &k,
        &eta_long_constants(&t)?,
        &[],
        &[],
        ReflectOptions::default(),
    )?;
    println!(
        "optimised:  {} nodes, tree {}",
        opt.term.size(),
        bohm_truncate(&opt.term, 3)?
    );
    Ok(())
}
