//! Pauli-string support of `Z_0(t)` on each site: the operator light cone.
//!
//! `cargo run --release --example operator_spreading`

use otoc_lab::models::{build_spin_chain, SpinChainSpec};
use otoc_lab::scrambling::{bch_series, heisenberg_evolve, support_profile, TimeGrid};

fn main() -> otoc_lab::Result<()> {
    let length = 6;
    let model = build_spin_chain(&SpinChainSpec::chaotic(length))?;
    let w = model.local_operator(0, "Z")?;
    let grid = TimeGrid::uniform(0.0, 4.0, 17)?;
    let profile = support_profile(&model, &w, &grid)?;

    print!("{:>5}", "t");
    (0..length).for_each(|j| print!("  site{j}"));
    println!();
    for (t, row) in grid.times().iter().zip(profile.rows()) {
        print!("{t:>5.2}");
        row.iter().for_each(|x| print!(" {x:6.3}"));
        println!();
    }
    for j in 1..length {
        println!(
            "site {j} reaches weight 0.05 at t = {:?}",
            profile.arrival_time(j, 0.05)
        );
    }

    // short times: the nested-commutator series converges to the exact W(t)
    let t = 0.2;
    let exact = heisenberg_evolve(&model, &w, t)?;
    for order in [1, 2, 4, 8] {
        let err = bch_series(&model, &w, t, order)?.sub(&exact)?.frobenius_norm();
        println!("order {order}: |series - W(t)|_F = {err:.2e}");
    }
    Ok(())
}
