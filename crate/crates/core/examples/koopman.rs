//! Ulam discretization of the cat-map transfer operator: a permutation of
//! lattice cells that preserves the uniform density and mixes observables.
//!
//! `cargo run --example koopman`

use std::f64::consts::TAU;

use otoc_lab::classical::{koopman_correlation, koopman_matrix, TorusMap};

fn main() -> otoc_lab::Result<()> {
    let grid = koopman_matrix(&TorusMap::Cat, 50)?;
    println!("{} cells, permutation: {}", grid.num_cells(), grid.is_permutation());

    let uniform = vec![1.0 / grid.num_cells() as f64; grid.num_cells()];
    let pushed = grid.push_density(&uniform)?;
    let drift = pushed
        .iter()
        .zip(&uniform)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("uniform density after one step: max change {drift:.1e}");

    let f = grid.sample(|x, _| (TAU * x).cos());
    let corr = koopman_correlation(&grid, &f, &f, 6)?;
    for (n, c) in corr.iter() {
        println!("step {n}: <f∘T^n, f> - <f><f> = {c:+.5}");
    }
    Ok(())
}
