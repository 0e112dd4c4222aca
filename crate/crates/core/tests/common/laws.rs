//! Exhaustive checks of the order-theoretic laws of `K` at one type.

use lyc::domains::apply;
use lyc::{KModel, Model, SimpleType};

/// Per-element laws at `ty`: `bar(d↑) = d`, the Galois connection
/// `bar(f) ≤ d ⟺ f ≤ d↑`, commutation `bar(f(p)) = bar(f)(bar(p))`, the
/// projection of each streamed element, and `D`-completeness together with
/// `⋁L_d = d↑`. Arrow types are streamed, so `K_ty` itself is never stored.
/// Returns the number of elements visited.
pub fn single_laws(k: &KModel, ty: &SimpleType) -> Result<u64, String> {
    match ty.split_arrow() {
        None => base_laws(k),
        Some((a, b)) => arrow_laws(k, a, b),
    }
}

fn err(e: lyc::Error) -> String {
    e.to_string()
}

fn base_laws(k: &KModel) -> Result<u64, String> {
    let o = SimpleType::Base;
    let ko = k.domain(&o).map_err(err)?;
    let d = k.d_model();
    let dom = d.domain(&o).map_err(err)?;
    let bars = k.bar_table(&o).map_err(err)?;
    for di in 0..dom.len() {
        let up = k.uparrow(&o, dom.get(di)).map_err(err)?;
        let ui = ko.index_of(&up).ok_or("uparrow outside K_o")?;
        if bars[ui] as usize != di {
            return Err(format!("bar(uparrow(#{di})) != #{di} at o"));
        }
        for f in 0..ko.len() {
            if dom.leq(bars[f] as usize, di) != ko.leq(f, ui) {
                return Err(format!("Galois law fails at o for #{f}, #{di}"));
            }
        }
        let fiber: Vec<usize> = (0..ko.len()).filter(|&f| bars[f] as usize == di).collect();
        let mut join = *fiber.first().ok_or(format!("L_#{di} is empty at o"))?;
        for &f in &fiber[1..] {
            join = ko
                .join_by_search(join, f)
                .ok_or(format!("no join in L_#{di} at o"))?;
        }
        let bot = ko.index_of(&k.bottom_hat(&o).map_err(err)?).unwrap();
        if !ko.leq(bot, join) {
            return Err(format!("bottom-hat is not below the join of L_#{di} at o"));
        }
        for f in 0..ko.len() {
            if ko.leq(f, join) != dom.leq(bars[f] as usize, di) {
                return Err(format!("D-completeness fails at o for #{f}, #{di}"));
            }
        }
        if join != ui {
            return Err(format!("join of L_#{di} differs from its uparrow at o"));
        }
    }
    Ok(ko.len() as u64)
}

fn arrow_laws(k: &KModel, a: &SimpleType, b: &SimpleType) -> Result<u64, String> {
    let ty = SimpleType::arrow(a.clone(), b.clone());
    let ka = k.domain(a).map_err(err)?;
    let kb = k.domain(b).map_err(err)?;
    let bar_a = k.bar_table(a).map_err(err)?;
    let bar_b = k.bar_table(b).map_err(err)?;
    let dm = k.d_model();
    let da = dm.domain(a).map_err(err)?;
    let dab = dm.domain(&ty).map_err(err)?;
    let nb = kb.len();
    let leq_b: Vec<bool> = (0..nb * nb).map(|x| kb.leq(x / nb, x % nb)).collect();
    let join_b: Vec<Option<u32>> = (0..nb * nb)
        .map(|x| kb.join(x / nb, x % nb).map(|j| j as u32))
        .collect();
    let up_a: Vec<usize> = (0..da.len())
        .map(|e| {
            ka.index_of(&k.uparrow(a, da.get(e)).unwrap())
                .expect("uparrow in K")
        })
        .collect();
    let d_tables: Vec<Vec<u32>> = (0..dab.len())
        .map(|d| dab.table_of(d).expect("function table").to_vec())
        .collect();
    // `d↑` as tables of indices into `K_b`, and law `bar(d↑) = d`.
    let mut up_ab: Vec<Vec<u32>> = Vec::new();
    for (d, dt) in d_tables.iter().enumerate() {
        let up = k.uparrow(&ty, dab.get(d)).map_err(err)?;
        let table: Vec<u32> = up
            .table()
            .ok_or("uparrow is not a table")?
            .iter()
            .map(|v| kb.index_of(v).expect("uparrow values in K") as u32)
            .collect();
        let bar: Vec<u32> = up_a.iter().map(|&p| bar_b[table[p] as usize]).collect();
        if bar != *dt {
            return Err(format!("bar(uparrow(#{d})) != #{d} at {ty}"));
        }
        if k.bar(&ty, &up).map_err(err)? != *dab.get(d) {
            return Err(format!("library bar disagrees on uparrow(#{d}) at {ty}"));
        }
        up_ab.push(table);
    }
    let bot_b = kb
        .index_of(&k.bottom_hat(b).map_err(err)?)
        .expect("bottom-hat in K") as u32;
    let mut fiber_join: Vec<Option<Vec<u32>>> = vec![None; dab.len()];
    let mut visited = 0u64;
    let mut failure: Option<String> = None;
    k.for_each_arrow_element(a, b, &mut |t, di| {
        visited += 1;
        let dt = &d_tables[di];
        for (p, &e) in bar_a.iter().enumerate() {
            if bar_b[t[p] as usize] != dt[e as usize] {
                failure = Some(format!(
                    "bar(f(p)) != bar(f)(bar(p)) at {ty}: {t:?}, p = #{p}"
                ));
                return Ok(false);
            }
        }
        let bar: Vec<u32> = up_a.iter().map(|&p| bar_b[t[p] as usize]).collect();
        if bar != *dt {
            failure = Some(format!("projection of {t:?} is not #{di} at {ty}"));
            return Ok(false);
        }
        for (d, up) in up_ab.iter().enumerate() {
            let below = t
                .iter()
                .zip(up)
                .all(|(&x, &y)| leq_b[x as usize * nb + y as usize]);
            if below != dab.leq(di, d) {
                failure = Some(format!("Galois law fails at {ty}: {t:?}, #{d}"));
                return Ok(false);
            }
        }
        let acc = &mut fiber_join[di];
        match acc {
            None => *acc = Some(t.to_vec()),
            Some(acc) => {
                for (x, &y) in acc.iter_mut().zip(t) {
                    match join_b[*x as usize * nb + y as usize] {
                        Some(j) => *x = j,
                        None => {
                            failure = Some(format!("no pointwise join in L_#{di} at {ty}"));
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    })
    .map_err(err)?;
    if let Some(f) = failure {
        return Err(f);
    }
    let mut joins = Vec::with_capacity(dab.len());
    for (d, j) in fiber_join.into_iter().enumerate() {
        let j = j.ok_or(format!("L_#{d} is empty at {ty}"))?;
        for (p, &e) in bar_a.iter().enumerate() {
            if bar_b[j[p] as usize] != d_tables[d][e as usize] {
                return Err(format!("join of L_#{d} is not related to #{d} at {ty}"));
            }
        }
        if !j.iter().all(|&x| leq_b[bot_b as usize * nb + x as usize]) {
            return Err(format!(
                "bottom-hat is not below the join of L_#{d} at {ty}"
            ));
        }
        if j != up_ab[d] {
            return Err(format!("join of L_#{d} differs from its uparrow at {ty}"));
        }
        joins.push(j);
    }
    k.for_each_arrow_element(a, b, &mut |t, e| {
        for (d, j) in joins.iter().enumerate() {
            let below = t
                .iter()
                .zip(j)
                .all(|(&x, &y)| leq_b[x as usize * nb + y as usize]);
            if below != dab.leq(e, d) {
                failure = Some(format!("D-completeness fails at {ty}: {t:?}, #{d}"));
                return Ok(false);
            }
        }
        Ok(true)
    })
    .map_err(err)?;
    match failure {
        Some(f) => Err(f),
        None => Ok(visited),
    }
}

/// Pairwise laws on the materialised `K_ty`: every pair has a pointwise join
/// in `K` projecting to the join of projections, and every pair with a common
/// lower bound has a meet projecting to the meet of projections. Returns the
/// number of pairs.
pub fn pairwise_laws(k: &KModel, ty: &SimpleType) -> Result<u64, String> {
    let dom = k.domain(ty).map_err(err)?;
    let bars = k.bar_table(ty).map_err(err)?;
    let dd = k.d_model().domain(ty).map_err(err)?;
    let n = dom.len();
    for i in 0..n {
        for j in i..n {
            let bi = bars[i] as usize;
            let bj = bars[j] as usize;
            let join = dom
                .join(i, j)
                .ok_or(format!("no join of #{i}, #{j} in K at {ty}"))?;
            if dom.join_by_search(i, j) != Some(join) {
                return Err(format!("pointwise join of #{i}, #{j} is not least at {ty}"));
            }
            if Some(bars[join] as usize) != dd.join(bi, bj) {
                return Err(format!("bar(#{i} v #{j}) != bar v bar at {ty}"));
            }
            let has_lower = (0..n).any(|l| dom.leq(l, i) && dom.leq(l, j));
            if has_lower {
                let meet = dom
                    .meet_by_search(i, j)
                    .ok_or(format!("#{i}, #{j} have a lower bound but no meet at {ty}"))?;
                if Some(bars[meet] as usize) != dd.meet(bi, bj) {
                    return Err(format!("bar(#{i} ^ #{j}) != bar ^ bar at {ty}"));
                }
            }
        }
    }
    Ok((n * (n + 1) / 2) as u64)
}

/// `Fix(f) = f(Fix(f))` for every `f ∈ K_{o -> o}`, monotonicity of `Fix` on
/// all ordered pairs, and agreement with `⋀ₙ fⁿ(lfp(bar f)↑)` computed here.
pub fn fixpoint_laws(k: &KModel) -> Result<u64, String> {
    let o = SimpleType::Base;
    let oo = SimpleType::arrow(o.clone(), o.clone());
    let ko = k.domain(&o).map_err(err)?;
    let koo = k.domain(&oo).map_err(err)?;
    let bars_o = k.bar_table(&o).map_err(err)?;
    let dm = k.d_model();
    let d_o = dm.domain(&o).map_err(err)?;
    let mut fixes = Vec::with_capacity(koo.len());
    for i in 0..koo.len() {
        let f = koo.get(i);
        let x = k.fix_k(&o, f).map_err(err)?;
        if apply(&ko, f, &x).map_err(err)? != x {
            return Err(format!("Fix(#{i}) is not a fixpoint"));
        }
        // Least fixpoint of bar f on {⊥ < ⊤}, then the decreasing sequence.
        let fbar = |e: usize| -> usize {
            let up = k.uparrow(&o, d_o.get(e)).unwrap();
            bars_o[ko.index_of(&apply(&ko, f, &up).unwrap()).unwrap()] as usize
        };
        let mut e = 0;
        while fbar(e) != e {
            e = fbar(e);
        }
        let mut cur = k.uparrow(&o, d_o.get(e)).map_err(err)?;
        for _ in 0..=ko.len() {
            let next = apply(&ko, f, &cur).map_err(err)?;
            if !ko.leq_values(&next, &cur) {
                return Err(format!("sequence for #{i} is not decreasing"));
            }
            cur = next;
        }
        if cur != x {
            return Err(format!("Fix(#{i}) differs from the limit of its sequence"));
        }
        fixes.push(ko.index_of(&x).ok_or("Fix outside K_o")?);
    }
    let mut pairs = 0u64;
    for i in 0..koo.len() {
        for j in 0..koo.len() {
            if koo.leq(i, j) {
                pairs += 1;
                if !ko.leq(fixes[i], fixes[j]) {
                    return Err(format!("Fix is not monotone on #{i} <= #{j}"));
                }
            }
        }
    }
    Ok(pairs)
}
