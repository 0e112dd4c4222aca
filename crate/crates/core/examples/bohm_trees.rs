//! Böhm tree prefixes, decided divergence and fuel-bounded reduction.
//!
//! ```text
//! cargo run --example bohm_trees
//! ```

use lyc::reduction::bohm_truncate_by_fuel;
use lyc::{bohm_truncate, divergence_check, parse_term, Signature};

fn main() -> lyc::Result<()> {
    let sig = Signature::with_tree(&[("c", 0), ("d", 0), ("a", 2)])?;
    for src in [
        "Y (\\F:o->o. \\x:o. a x (F x)) c",
        "a c (Y (\\x:o. x))",
        "Y (\\f:o->o. \\x:o. a x (f (a x d))) c",
    ] {
        let t = parse_term(src, &sig)?;
        println!("{src}");
        println!("  diverges: {}", divergence_check(&t)?);
        for depth in 1..=3 {
            println!("  depth {depth}: {}", bohm_truncate(&t, depth)?);
        }
        // Without the divergence model, reduction can only give up.
        let (tree, committed) = bohm_truncate_by_fuel(&t, 3, 100)?;
        println!(
            "  by fuel: {tree}{}",
            if committed { "" } else { " (Ω guessed)" }
        );
    }
    Ok(())
}
