//! Kicked-rotor OTOC for a coherent packet on a regular island and in the
//! chaotic sea, next to the classical standard-map exponent at the same K.
//!
//! `cargo run --release --example kicked_rotor`

use std::f64::consts::PI;

use otoc_lab::analysis::AnalysisSettings;
use otoc_lab::classical::{tangent_lyapunov, MapState, TorusMap};
use otoc_lab::models::{build_kicked_rotor, coherent_wavepacket, KickedRotorSpec, PhasePoint};
use otoc_lab::scrambling::{squared_commutator, TimeGrid};

fn main() -> otoc_lab::Result<()> {
    let grid = TimeGrid::kicks(30);
    for (label, k, q, p) in [("island", 0.5, PI, 0.0), ("sea", 10.0, 1.0, 0.5)] {
        let model = build_kicked_rotor(&KickedRotorSpec {
            kick_strength: k,
            effective_planck: 0.1,
            basis_size: 511,
        })?;
        let packet = coherent_wavepacket(&model, PhasePoint { q, p }, 1.0)?;
        let mom = model.local_operator(0, "p")?;
        let c = squared_commutator(&model, &mom, &mom, &packet, &grid)?;
        let fit = AnalysisSettings::default().growth_rate(&c, 1e-12, 0.1)?;
        let map = TorusMap::standard(k)?;
        let lambda = tangent_lyapunov(&map, MapState::new(&map, q, p), 20_000);
        println!(
            "{label:>6}: K = {k:4}  C(10) = {:.3e}  C(30) = {:.3e}  rate = {:.3}  classical λ = {lambda:.3}",
            c.values()[10],
            c.values()[30],
            fit.rate
        );
    }
    Ok(())
}
