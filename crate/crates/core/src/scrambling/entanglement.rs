use super::engine::Engine;
use super::{TimeGrid, TimeSeries};
use crate::error::{Error, Result};
use crate::hilbert::{bipartite_matrix, PureState};
use crate::models::ModelInstance;

/// Largest denominator tried when rationalizing level spacings.
const MAX_DENOMINATOR: u64 = 64;

fn entropy_of_amplitudes(state: &PureState, cut: &[usize]) -> Result<f64> {
    let (_, m) = bipartite_matrix(state, cut)?;
    // Schmidt weights are the squared singular values of the reshaped amplitudes.
    let svd = m.svd(false, false);
    Ok(svd
        .singular_values
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum())
}

/// Von Neumann entropy (nats) of the sites in `cut` for a pure state.
pub fn entanglement_entropy(state: &PureState, cut: &[usize]) -> Result<f64> {
    entropy_of_amplitudes(state, cut)
}

/// `S_A(t)` for `|ψ(t)⟩ = U(t)|ψ⟩` on every grid time.
pub fn entanglement_growth(
    model: &ModelInstance,
    state: &PureState,
    cut: &[usize],
    grid: &TimeGrid,
) -> Result<TimeSeries<f64>> {
    if state.space() != model.space() {
        return Err(Error::space_mismatch(state.space(), model.space()));
    }
    // reject a bad cut before doing any evolution
    bipartite_matrix(state, cut)?;
    let engine = Engine::new(model)?;
    engine.check_grid(grid)?;
    let psi = engine.frame_vec(state.amplitudes());
    let values = engine.map_states(grid, &psi, |phi| {
        let amps = engine.unframe_vec(phi);
        entropy_of_amplitudes(&PureState::from_raw(state.space().clone(), amps), cut)
    })?;
    TimeSeries::new(grid.clone(), values.into_iter().collect::<Result<Vec<_>>>()?)
}

/// Return probability `|⟨ψ|U(t)|ψ⟩|²`.
pub fn recurrence_fidelity(model: &ModelInstance, state: &PureState, grid: &TimeGrid) -> Result<TimeSeries<f64>> {
    if state.space() != model.space() {
        return Err(Error::space_mismatch(state.space(), model.space()));
    }
    let engine = Engine::new(model)?;
    engine.check_grid(grid)?;
    let psi = engine.frame_vec(state.amplitudes());
    let values = engine.map_states(grid, &psi, |phi| psi.dotc(phi).norm_sqr())?;
    TimeSeries::new(grid.clone(), values)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `q ≤ MAX_DENOMINATOR` with `x·q` within `tol` of an integer.
fn denominator(x: f64, tol: f64) -> Option<u64> {
    (1..=MAX_DENOMINATOR).find(|&q| {
        let y = x * q as f64;
        (y - y.round()).abs() <= tol * q as f64
    })
}

/// Smallest `T > 0` with `e^{−iE_k T}` equal for every level up to a global
/// phase, i.e. every gap `E_k − E_0` is an integer multiple of `2π/T`.
///
/// Gaps are rationalized against the smallest nonzero gap with denominators
/// up to 64; returns `None` for incommensurate spectra, and `None` for a
/// fully degenerate spectrum (every `T` works).
pub fn common_period(energies: &[f64], tol: f64) -> Option<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let gaps: Vec<f64> = energies.iter().map(|e| e - e0).filter(|g| *g > tol).collect();
    let base = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    if !base.is_finite() {
        return None;
    }
    let mut q = 1u64;
    for g in &gaps {
        let d = denominator(g / base, tol / base)?;
        q = q / gcd(q, d) * d;
        if q > MAX_DENOMINATOR {
            return None;
        }
    }
    // base/q is the fundamental frequency; all gaps are integer multiples of it
    Some(2.0 * std::f64::consts::PI * q as f64 / base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{reduced_density, von_neumann_entropy, CVector, CompositeSpace, C64};
    use crate::models::{build_spin_chain, Boundary, SpinChainSpec};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_has_ln2() {
        let s = CompositeSpace::qubits(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = CVector::from_vec(vec![C64::new(h, 0.0), 0.0.into(), 0.0.into(), C64::new(h, 0.0)]);
        let bell = PureState::new(s, amps).unwrap();
        assert_relative_eq!(entanglement_entropy(&bell, &[0]).unwrap(), 2f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(entanglement_entropy(&bell, &[0, 1]).unwrap(), 0.0, epsilon = 1e-14);
        assert!(entanglement_entropy(&bell, &[]).is_err());
    }

    #[test]
    fn svd_route_matches_reduced_density() {
        let s = CompositeSpace::qubits(5).unwrap();
        let psi = PureState::random(&s, &mut ChaCha8Rng::seed_from_u64(7));
        for cut in [&[0usize][..], &[1, 3], &[0, 1, 2]] {
            let oracle = von_neumann_entropy(&reduced_density(&psi, cut).unwrap());
            assert_relative_eq!(entanglement_entropy(&psi, cut).unwrap(), oracle, epsilon = 1e-12);
        }
        // complementary cuts agree for pure states
        assert_relative_eq!(
            entanglement_entropy(&psi, &[0, 1]).unwrap(),
            entanglement_entropy(&psi, &[2, 3, 4]).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn product_state_starts_unentangled_and_grows() {
        let m = build_spin_chain(&SpinChainSpec::chaotic(6)).unwrap();
        let psi = PureState::product_basis(m.space(), &[0; 6]).unwrap();
        let g = TimeGrid::uniform(0.0, 4.0, 5).unwrap();
        let s = entanglement_growth(&m, &psi, &[0, 1, 2], &g).unwrap();
        assert!(s.values()[0].abs() < 1e-12);
        assert!(s.values()[4] > 0.5);
        assert!(s.values().iter().all(|&x| x <= 3.0 * 2f64.ln() + 1e-12));
    }

    #[test]
    fn periods() {
        let tau = 2.0 * std::f64::consts::PI;
        assert_relative_eq!(
            common_period(&[-2.0, 1.0, 1.0, 0.0], 1e-9).unwrap(),
            tau,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            common_period(&[0.0, 0.5, 1.5], 1e-9).unwrap(),
            2.0 * tau,
            epsilon = 1e-12
        );
        assert!(common_period(&[0.0, 1.0, 2f64.sqrt()], 1e-9).is_none());
        assert!(common_period(&[3.0, 3.0], 1e-9).is_none());
    }

    #[test]
    fn two_qubit_revival() {
        let spec = SpinChainSpec {
            length: 2,
            coupling: 1.0,
            field_x: 0.0,
            field_z: 0.5,
            boundary: Boundary::Open,
        };
        let m = build_spin_chain(&spec).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]);
        let s1 = CompositeSpace::qubits(1).unwrap();
        let p = PureState::new(s1, plus).unwrap();
        let psi = p.tensor(&p);
        let energies: Vec<f64> = crate::hilbert::HermitianSpectrum::new(m.hamiltonian().unwrap())
            .unwrap()
            .eigenvalues()
            .iter()
            .copied()
            .collect();
        let t = common_period(&energies, 1e-9).unwrap();
        let g = TimeGrid::new(vec![0.0, 0.5 * t, t]).unwrap();
        let f = recurrence_fidelity(&m, &psi, &g).unwrap();
        assert_relative_eq!(f.values()[0], 1.0, epsilon = 1e-12);
        assert!(f.values()[1] < 0.99);
        assert_relative_eq!(f.values()[2], 1.0, epsilon = 1e-10);
    }
}
