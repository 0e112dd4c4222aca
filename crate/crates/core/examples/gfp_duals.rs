//! A greatest fixpoint model, and the automata recognising each of its values.
//!
//! ```text
//! cargo run --example gfp_duals
//! ```

use lyc::gfp::dual_automata;
use lyc::{bohm_truncate, build_gfp, eval_closed, parse_term, CutPolicy, Model, Signature};
use lyc::{SimpleType, TacAutomaton};

fn main() -> lyc::Result<()> {
    let sig = Signature::with_tree(&[("c", 0), ("d", 0), ("a", 2)])?;
    // `c` at even depth, `d` at odd depth; `Ω` is accepted everywhere.
    let mut aut = TacAutomaton::new(&["even", "odd"], "even")?;
    for (q, good, bad) in [(0, "c", "d"), (1, "d", "c")] {
        aut.set_leaf(q, good, true);
        aut.set_leaf(q, bad, false);
        aut.set_leaf(q, "Omega", true);
    }
    aut.add_bin(0, "a", 1, 1);
    aut.add_bin(1, "a", 0, 0);

    let m = build_gfp(&aut);
    let base = m.domain(&SimpleType::Base)?;
    let duals = dual_automata(&m, &sig)?;
    for src in ["c", "a d d", "a c (a c c)", "a (Y (\\x:o. x)) d"] {
        let t = parse_term(src, &sig)?;
        let v = base
            .index_of(&eval_closed(&t, &m)?)
            .expect("value in the base domain");
        let tree = bohm_truncate(&t, 8)?;
        println!("{src:20} value {}", base.label(v));
        for (p, dual) in duals.iter().enumerate() {
            // The dual for `p` accepts exactly the trees whose value is above `p`.
            let accepted = dual.accepts_finite(&tree, CutPolicy::RejectCuts)?;
            assert_eq!(accepted, base.leq(p, v));
            println!(
                "  dual {:12} {}",
                base.label(p),
                if accepted { "accepts" } else { "rejects" }
            );
        }
    }
    Ok(())
}
