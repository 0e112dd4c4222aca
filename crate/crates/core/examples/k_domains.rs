//! The finite domains of `K`, their projections to `D`, and `↑`.
//!
//! ```text
//! cargo run --release --example k_domains
//! ```

use lyc::{KModel, Model, SimpleType, TacAutomaton};

fn main() -> lyc::Result<()> {
    // Two states, with `Ω` accepted from state 1 only.
    let mut aut = TacAutomaton::new(&["1", "2"], "1")?;
    aut.set_leaf(0, "Omega", true);
    aut.set_leaf(1, "Omega", false);
    let k = KModel::new(&aut);

    let o = SimpleType::Base;
    print!("{}", k.dump(&o)?);

    let oo = SimpleType::arrow(o.clone(), o.clone());
    let koo = k.domain(&oo)?;
    let bars = k.bar_table(&oo)?;
    println!("|K(o -> o)| = {}", koo.len());
    let d = k.d_model().domain(&oo)?;
    for di in 0..d.len() {
        let fiber = bars.iter().filter(|&&b| b as usize == di).count();
        let up = k.uparrow(&oo, d.get(di))?;
        println!(
            "  {:12} {fiber:3} elements project here; its lift is #{}",
            d.label(di),
            koo.index_of(&up).expect("lift lies in K"),
        );
    }

    // Larger domains are streamed one function table at a time.
    let mut count = 0u64;
    k.for_each_arrow_element(&o, &oo, &mut |_, _| {
        count += 1;
        Ok(true)
    })?;
    println!("|K(o -> o -> o)| = {count}");
    Ok(())
}
