//! Lyapunov exponents of the cat and standard maps from the tangent map,
//! and where finite differences stop tracking it.
//!
//! `cargo run --release --example classical_maps`

use otoc_lab::classical::{
    iterate_map, sensitivity_breakdown, sensitivity_fd, tangent_evolve, tangent_lyapunov, MapState, TorusMap,
};

fn main() -> otoc_lab::Result<()> {
    let cat = TorusMap::Cat;
    let s0 = MapState::new(&cat, 0.2, 0.7);
    println!(
        "cat map: λ = {:.10}, exact ln((3+√5)/2) = {:.10}",
        tangent_lyapunov(&cat, s0, 100_000),
        ((3.0 + 5f64.sqrt()) / 2.0).ln()
    );
    for n in [1, 4, 8] {
        let exact = tangent_evolve(&cat, s0, n).matrix()[(0, 0)];
        println!(
            "  ∂x_{n}/∂x_0 = {exact:.1}, finite difference {:.1}",
            sensitivity_fd(&cat, s0, n, 1e-7)
        );
    }
    println!(
        "  finite differences drift past 1e-4 relative error at step {:?}",
        sensitivity_breakdown(&cat, s0, 1e-7, 64, 1e-4)
    );

    for k in [0.0, 0.5, 0.97, 2.0, 5.0, 10.0] {
        let map = TorusMap::standard(k)?;
        let s = MapState::new(&map, 1.0, 0.5);
        let lambda = tangent_lyapunov(&map, s, 100_000);
        let end = iterate_map(&map, s, 1000);
        println!(
            "standard map K = {k:4}: λ = {lambda:.4}  (ln(K/2) = {:.4}); x_1000 = ({:.3}, {:.3})",
            (k / 2.0).ln(),
            end.x,
            end.p
        );
    }
    Ok(())
}
