//! Exponential squared commutator at the unstable fixed point of
//! `H = p²/2m − mλ²x²/2`, checked against a doubled truncation.
//!
//! `cargo run --release --example inverted_oscillator`

use otoc_lab::analysis::{fit_lyapunov, GrowthWindow};
use otoc_lab::hilbert::PureState;
use otoc_lab::models::{build_inverted_oscillator, InvertedOscillatorSpec};
use otoc_lab::scrambling::{squared_commutator, TimeGrid};

fn main() -> otoc_lab::Result<()> {
    let grid = TimeGrid::uniform(0.0, 3.0, 31)?;
    let mut runs = Vec::new();
    for truncation in [128, 256] {
        let model = build_inverted_oscillator(&InvertedOscillatorSpec {
            mass: 1.0,
            instability_rate: 1.0,
            truncation,
            regular: false,
        })?;
        // u = (x + p/mλ)/√2 is the unstable direction; [u(t), x] grows as e^{λt}
        let w = model.local_operator(0, "u")?;
        let v = model.local_operator(0, "x")?;
        let ground = PureState::basis(model.space(), 0)?;
        runs.push(squared_commutator(&model, &w, &v, &ground, &grid)?);
    }
    let converged = runs[0]
        .values()
        .iter()
        .zip(runs[1].values())
        .take_while(|(a, b)| (*a - *b).abs() <= 1e-3 * b.abs())
        .count();
    let t_end = grid.times()[converged - 1];
    println!("truncations agree up to t = {t_end}");
    for (t, c) in runs[0].iter().step_by(5) {
        println!("t = {t:4.1}  C = {c:12.5e}  e^(2t)/2 = {:12.5e}", (2.0 * t).exp() / 2.0);
    }
    let fit = fit_lyapunov(&runs[0], GrowthWindow::between(&runs[0], 0.0, t_end))?;
    println!(
        "fitted rate {:.5} (expected 2λ = 2), {} points, {:.2} decades",
        fit.rate,
        fit.points,
        fit.decades()
    );
    Ok(())
}
