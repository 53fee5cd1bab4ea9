//! Half-chain entanglement entropy after a quench, chaotic versus
//! integrable chain, and an exact revival of a commensurate two-qubit chain.
//!
//! `cargo run --release --example entanglement`

use otoc_lab::hilbert::{HermitianSpectrum, PureState};
use otoc_lab::models::{build_spin_chain, Boundary, SpinChainSpec};
use otoc_lab::scrambling::{common_period, entanglement_growth, recurrence_fidelity, TimeGrid};

fn main() -> otoc_lab::Result<()> {
    let length = 8;
    let neel: Vec<usize> = (0..length).map(|k| k % 2).collect();
    let cut: Vec<usize> = (0..length / 2).collect();
    let grid = TimeGrid::uniform(0.0, 10.0, 11)?;
    for (name, spec) in [
        ("chaotic", SpinChainSpec::chaotic(length)),
        ("integrable", SpinChainSpec::integrable(length)),
    ] {
        let model = build_spin_chain(&spec)?;
        let psi = PureState::product_basis(model.space(), &neel)?;
        let s = entanglement_growth(&model, &psi, &cut, &grid)?;
        let row: Vec<String> = s.values().iter().map(|v| format!("{v:.3}")).collect();
        println!("{name:>10}: S(t) = {}", row.join(" "));
    }
    println!("Page value for 4|4 qubits: {:.3}", 4.0 * 2f64.ln() - 0.5);

    let pair = build_spin_chain(&SpinChainSpec {
        length: 2,
        coupling: 1.0,
        field_x: 0.0,
        field_z: 0.5,
        boundary: Boundary::Open,
    })?;
    let energies: Vec<f64> = HermitianSpectrum::new(pair.hamiltonian().expect("Hamiltonian model"))?
        .eigenvalues()
        .iter()
        .copied()
        .collect();
    let period = common_period(&energies, 1e-9).expect("commensurate spectrum");
    let psi = PureState::normalized(
        pair.space().clone(),
        nalgebra::DVector::from_element(4, otoc_lab::hilbert::C64::new(1.0, 0.0)),
    )?;
    let f = recurrence_fidelity(&pair, &psi, &TimeGrid::new(vec![period / 3.0, period / 2.0, period])?)?;
    println!("common period {period:.6}; fidelity at T/3, T/2, T: {:?}", f.values());
    Ok(())
}
