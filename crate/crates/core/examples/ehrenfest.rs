//! Saturation time of the kicked-rotor OTOC against ln(1/ħ_eff).
//!
//! `cargo run --release --example ehrenfest`

use otoc_lab::analysis::{ehrenfest_scaling, EhrenfestSetup};

fn main() -> otoc_lab::Result<()> {
    let setup = EhrenfestSetup::new(10.0);
    let scaling = ehrenfest_scaling(&setup, &[0.2, 0.1, 0.05])?;
    for pt in &scaling.points {
        println!(
            "ħ = {:<5} N = {:<4} t_sat = {:.3} kicks ({:?})",
            pt.hbar, pt.basis_size, pt.saturation.t_sat, pt.saturation.method
        );
    }
    println!(
        "slope dt_sat/dln(1/ħ) = {:.3}  (1/λ_classical = {:.3})",
        scaling.slope,
        1.0 / scaling.classical_lyapunov
    );
    println!("{}", scaling.note);
    Ok(())
}
