//! Growth-window detection, Lyapunov fit, saturation and the chaos-bound
//! check on a synthetic logistic curve.
//!
//! `cargo run --example growth_analysis`

use otoc_lab::analysis::{detect_growth_window, estimate_saturation, fit_lyapunov, mss_check};
use otoc_lab::scrambling::{TimeGrid, TimeSeries};

fn main() -> otoc_lab::Result<()> {
    let rate = 1.5;
    let grid = TimeGrid::uniform(0.0, 20.0, 201)?;
    let values = grid
        .times()
        .iter()
        .map(|t| 2.0 / (1.0 + 1e6 * (-rate * t).exp()))
        .collect();
    let c = TimeSeries::new(grid, values)?;

    let window = detect_growth_window(&c, 1e-12, 0.1)?;
    let fit = fit_lyapunov(&c, window)?;
    println!(
        "window t ∈ [{:.1}, {:.1}] ({} points): rate {:.4} (true {rate}), residual {:.1e}",
        fit.t_start, fit.t_end, fit.points, fit.rate, fit.residual
    );
    let sat = estimate_saturation(&c)?;
    println!(
        "plateau {:.4} reached at t = {:.2} via {:?}",
        sat.plateau, sat.t_sat, sat.method
    );
    for temperature in [1.0, 0.2] {
        let verdict = mss_check(&fit, temperature)?;
        println!(
            "T = {temperature}: rate/2πT = {:.3} -> {} (window spans {:.2} decades{})",
            verdict.ratio,
            if verdict.pass {
                "within the bound"
            } else {
                "above the bound"
            },
            verdict.decades,
            if verdict.caveat {
                ", too short to be conclusive"
            } else {
                ""
            }
        );
    }
    Ok(())
}
