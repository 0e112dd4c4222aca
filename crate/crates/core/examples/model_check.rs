//! Decides whether Böhm trees are accepted by an automaton that rejects `Ω`.
//!
//! ```text
//! cargo run --example model_check
//! ```

use lyc::{
    build_gfp, gfp_check, k_check, parse_term, ExampleAutomaton, KModel, Signature, TacAutomaton,
};

fn main() -> lyc::Result<()> {
    let sig = Signature::with_tree(&[("c", 0), ("a", 2)])?;
    let aut = TacAutomaton::example(ExampleAutomaton::NoOmega, &sig)?;
    print!("{}", aut.to_text());

    let k = KModel::new(&aut);
    // The GFP model is exact only for automata that cannot see `Ω`.
    let gfp = build_gfp(&aut.omega_blind_variant());
    for src in [
        "a c c",
        "Y (\\x:o. x)",
        "a c (Y (\\x:o. x))",
        "Y (\\F:o->o. \\x:o. a x (F x)) c",
    ] {
        let t = parse_term(src, &sig)?;
        let r = k_check(&k, &t)?;
        let (g, _) = gfp_check(&gfp, &t)?;
        println!(
            "{src:40} K: {:8} {:12} GFP(blind): {}",
            if r.accepted { "accepted" } else { "rejected" },
            r.rendered,
            if g.accepted { "accepted" } else { "rejected" },
        );
    }
    Ok(())
}
