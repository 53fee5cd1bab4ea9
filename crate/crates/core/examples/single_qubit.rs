//! Squared commutator of a precessing qubit against its closed form.
//!
//! `cargo run --example single_qubit`

use otoc_lab::hilbert::{pauli, DensityMatrix, C64};
use otoc_lab::models::ModelInstance;
use otoc_lab::scrambling::{heisenberg_evolve, squared_commutator_validated, TimeGrid};

fn main() -> otoc_lab::Result<()> {
    let omega = 1.0;
    let h = pauli::x().scale(C64::new(omega / 2.0, 0.0));
    let model = ModelInstance::from_hamiltonian("qubit", h)?;
    let z = pauli::z();
    let rho = DensityMatrix::maximally_mixed(z.space());
    let grid = TimeGrid::uniform(0.0, 10.0, 11)?;

    let v = squared_commutator_validated(&model, &z, &z, &rho, &grid)?;
    println!("{:>6} {:>12} {:>12}", "t", "C(t)", "4 sin^2 t");
    for (t, c) in v.positive_form.iter() {
        println!("{t:>6.2} {c:>12.8} {:>12.8}", 4.0 * (omega * t).sin().powi(2));
    }
    println!(
        "largest disagreement between evaluation routes: {:.2e}",
        v.max_deviation
    );

    let wt = heisenberg_evolve(&model, &z, 0.7)?;
    let expected = z
        .scale(C64::new(0.7f64.cos(), 0.0))
        .add(&pauli::y().scale(C64::new(0.7f64.sin(), 0.0)))?;
    println!(
        "|W(0.7) - (cos t Z + sin t Y)|_max = {:.2e}",
        wt.sub(&expected)?.max_norm()
    );
    Ok(())
}
