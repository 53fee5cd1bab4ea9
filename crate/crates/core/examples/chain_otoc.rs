//! OTOC and squared commutator on a mixed-field Ising chain at infinite
//! temperature, with the growth window and plateau picked out of `C(t)`.
//!
//! `cargo run --release --example chain_otoc -- 6`

use otoc_lab::analysis::{estimate_saturation, AnalysisSettings};
use otoc_lab::hilbert::DensityMatrix;
use otoc_lab::models::{build_spin_chain, SpinChainSpec};
use otoc_lab::scrambling::{otoc_f, squared_commutator, TimeGrid};

fn main() -> otoc_lab::Result<()> {
    let length: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    let model = build_spin_chain(&SpinChainSpec::chaotic(length))?;
    let w = model.local_operator(0, "Z")?;
    let v = model.local_operator(length - 1, "Z")?;
    let rho = DensityMatrix::maximally_mixed(model.space());
    let grid = TimeGrid::uniform(0.0, 12.0, 49)?;

    let c = squared_commutator(&model, &w, &v, &rho, &grid)?;
    let f = otoc_f(&model, &w, &v, &rho, &grid)?;
    for ((t, c), f) in c.iter().zip(f.values()).step_by(4) {
        println!("t = {t:5.2}   C = {c:.5}   Re F = {:+.5}", f.re);
    }

    let sat = estimate_saturation(&c)?;
    println!(
        "plateau {:.4}, saturation time {:.2} ({:?})",
        sat.plateau, sat.t_sat, sat.method
    );
    match AnalysisSettings::default().growth_rate(&c, 1e-12, 0.1) {
        Ok(fit) if fit.valid => println!(
            "exponential window: rate {:.3} over {:.2} decades",
            fit.rate,
            fit.decades()
        ),
        Ok(fit) => println!(
            "no clean exponential window (best effort rate {:.3}, residual {:.2})",
            fit.rate, fit.residual
        ),
        Err(e) => println!("no growth fit: {e}"),
    }
    Ok(())
}
