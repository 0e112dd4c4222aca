//! Recursion schemes: parsing, translation to λY, and checking.
//!
//! ```text
//! cargo run --example schemes
//! ```

use lyc::scheme::{scheme_to_lamy, Scheme};
use lyc::{bohm_truncate, k_check, ExampleAutomaton, KModel, TacAutomaton};

const SCHEME: &str = "\
const c : o;
const a : o -> o -> o;
S : o = F c .
F x : o -> o = a x (F (a x x)) .
";

fn main() -> lyc::Result<()> {
    let s = Scheme::parse(SCHEME)?;
    let t = scheme_to_lamy(&s)?;
    println!("term: {t}");
    println!("tree: {}", bohm_truncate(&t, 3)?);
    let aut = TacAutomaton::example(ExampleAutomaton::NoOmega, &s.signature)?;
    let r = k_check(&KModel::new(&aut), &t)?;
    println!("Ω-free: {} {}", r.accepted, r.rendered);
    Ok(())
}
