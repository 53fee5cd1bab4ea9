//! Library results against references built independently inside the tests:
//! closed forms, hand-assembled Kronecker Hamiltonians and nalgebra's own
//! matrix exponential.

use std::f64::consts::{LN_2, PI, TAU};

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use otoc_lab::classical::{koopman_correlation, koopman_matrix, tangent_lyapunov, MapState, TorusMap};
use otoc_lab::hilbert::{expectation, pauli, DensityMatrix, PureState, C64};
use otoc_lab::models::{
    build_inverted_oscillator, build_kicked_rotor, build_spin_chain, coherent_wavepacket, Boundary,
    InvertedOscillatorSpec, KickedRotorSpec, ModelInstance, PhasePoint, SpinChainSpec,
};
use otoc_lab::scrambling::{
    common_period, entanglement_entropy, otoc_f, recurrence_fidelity, squared_commutator, support_profile, TimeGrid,
};

type M = DMatrix<C64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

fn site_op(op: &M, site: usize, l: usize) -> M {
    let id = M::identity(2, 2);
    (0..l).fold(M::identity(1, 1), |acc, k| kron(&acc, if k == site { op } else { &id }))
}

fn paulis() -> (M, M, M) {
    let x = M::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let y = M::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]);
    let z = M::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    (x, y, z)
}

/// Open mixed-field Ising chain, site 0 is the leftmost Kronecker factor.
fn ising(l: usize, j: f64, hx: f64, hz: f64) -> M {
    let (x, _, z) = paulis();
    let d = 1 << l;
    let mut h = M::zeros(d, d);
    for k in 0..l - 1 {
        h -= (site_op(&z, k, l) * site_op(&z, k + 1, l)) * c(j);
    }
    for k in 0..l {
        h -= site_op(&x, k, l) * c(hx) + site_op(&z, k, l) * c(hz);
    }
    h
}

/// Tr([W(t), V]† [W(t), V]) / d with U = exp(−iHt) from nalgebra's Padé exponential.
fn brute_c(h: &M, w: &M, v: &M, t: f64) -> f64 {
    let u = (h * C64::new(0.0, -t)).exp();
    let wt = u.adjoint() * w * &u;
    let k = &wt * v - v * &wt;
    (k.adjoint() * &k).trace().re / h.nrows() as f64
}

#[test]
fn chain_hamiltonian_matches_kronecker_assembly() {
    let model = build_spin_chain(&SpinChainSpec::chaotic(4)).unwrap();
    let h = model.hamiltonian().unwrap().matrix();
    let reference = ising(4, 1.0, 1.05, 0.5);
    assert!((h - &reference).iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn chain_squared_commutator_matches_pade_exponential() {
    let l = 4;
    let model = build_spin_chain(&SpinChainSpec::chaotic(l)).unwrap();
    let (_, _, z) = paulis();
    let href = ising(l, 1.0, 1.05, 0.5);
    let w = model.local_operator(0, "Z").unwrap();
    let v = model.local_operator(l - 1, "Z").unwrap();
    let rho = DensityMatrix::maximally_mixed(model.space());
    let grid = TimeGrid::new(vec![0.0, 0.5, 1.3, 2.7, 4.0]).unwrap();
    let got = squared_commutator(&model, &w, &v, &rho, &grid).unwrap();
    for (t, value) in got.iter() {
        let want = brute_c(&href, &site_op(&z, 0, l), &site_op(&z, l - 1, l), t);
        assert!((value - want).abs() < 1e-10, "t = {t}: {value} vs {want}");
    }
}

#[test]
fn single_qubit_closed_form_and_heisenberg_sign() {
    let model = ModelInstance::from_hamiltonian("qubit", pauli::x().scale(c(0.5))).unwrap();
    let z = pauli::z();
    let rho = DensityMatrix::maximally_mixed(z.space());
    let grid = TimeGrid::uniform(0.0, 10.0, 1001).unwrap();
    let series = squared_commutator(&model, &z, &z, &rho, &grid).unwrap();
    let worst = series
        .iter()
        .map(|(t, v)| (v - 4.0 * t.sin().powi(2)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");

    // F(t) = ⟨Z(t) Z Z(t) Z⟩ = cos 2t, since Z(t) = cos t Z + sin t Y
    let f = otoc_f(&model, &z, &z, &rho, &grid).unwrap();
    for (t, value) in f.iter().step_by(50) {
        assert!((value.re - (2.0 * t).cos()).abs() < 1e-12 && value.im.abs() < 1e-12);
    }
}

#[test]
fn rotor_kick_matrix_is_the_bessel_series() {
    // ⟨m| e^{−iκ cos θ} |n⟩ = (−i)^d J_d(κ), d = m − n taken mod N into |d| ≤ N/2
    // (the momentum window is periodic; J_{d±N}(κ) is far below round-off here)
    fn bessel(order: i32, x: f64) -> f64 {
        let n = order.abs();
        let mut term = (x / 2.0).powi(n) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..60 {
            term *= -(x / 2.0).powi(2) / (k as f64 * (k + n) as f64);
            sum += term;
        }
        // J_{−n} = (−1)^n J_n
        if order < 0 && n % 2 == 1 {
            -sum
        } else {
            sum
        }
    }
    let spec = KickedRotorSpec {
        kick_strength: 1.0,
        effective_planck: 0.5,
        basis_size: 41,
    };
    let model = build_kicked_rotor(&spec).unwrap();
    let u = model.floquet_unitary().unwrap().matrix();
    let kappa = spec.kick_strength / spec.effective_planck;
    let half = spec.max_quantum_number();
    for i in 0..spec.basis_size {
        for j in 0..spec.basis_size {
            let (m, n) = (i as i64 - half, j as i64 - half);
            let size = spec.basis_size as i64;
            let d = ((m - n).rem_euclid(size) + half).rem_euclid(size) - half;
            let d = d as i32;
            let free = C64::new(
                0.0,
                -(m as f64 * spec.effective_planck).powi(2) / (2.0 * spec.effective_planck),
            )
            .exp();
            let kick = C64::new(0.0, -1.0).powi(d) * bessel(d, kappa);
            let want = free * kick;
            assert!(
                (u[(i, j)] - want).norm() < 1e-12,
                "({m},{n}): {} vs {}",
                u[(i, j)],
                want
            );
        }
    }
}

#[test]
fn rotor_packet_follows_the_classical_kick() {
    let spec = KickedRotorSpec {
        kick_strength: 0.5,
        effective_planck: 0.01,
        basis_size: 201,
    };
    let model = build_kicked_rotor(&spec).unwrap();
    let map = TorusMap::standard(spec.kick_strength).unwrap();
    let (theta, p) = (1.0, 0.2);
    let psi = coherent_wavepacket(&model, PhasePoint { q: theta, p }, 1.0).unwrap();
    let mom = model.local_operator(0, "p").unwrap();
    let cos = model.local_operator(0, "cos").unwrap();
    let sin = model.local_operator(0, "sin").unwrap();
    assert!((expectation(&mom, &psi).unwrap().re - p).abs() < 1e-6);
    let angle = expectation(&sin, &psi)
        .unwrap()
        .re
        .atan2(expectation(&cos, &psi).unwrap().re);
    assert!((angle - theta).abs() < 1e-3, "packet centred at θ = {angle}");

    let u = model.floquet_unitary().unwrap();
    let kicked = PureState::new(model.space().clone(), u.apply(&psi).unwrap()).unwrap();
    let classical = map.step(MapState { x: theta, p });
    let p_after = expectation(&mom, &kicked).unwrap().re;
    assert!(
        (p_after - classical.p).abs() < 0.01 * spec.kick_strength,
        "{p_after} vs {}",
        classical.p
    );
}

#[test]
fn inverted_oscillator_matches_exponential_in_converged_window() {
    let spec = InvertedOscillatorSpec {
        mass: 1.0,
        instability_rate: 1.0,
        truncation: 256,
        regular: false,
    };
    let model = build_inverted_oscillator(&spec).unwrap();
    let w = model.local_operator(0, "u").unwrap();
    let v = model.local_operator(0, "x").unwrap();
    let ground = PureState::basis(model.space(), 0).unwrap();
    let grid = TimeGrid::uniform(0.0, 1.5, 16).unwrap();
    let series = squared_commutator(&model, &w, &v, &ground, &grid).unwrap();
    for (t, value) in series.iter() {
        assert_relative_eq!(*value, (2.0 * t).exp() / 2.0, max_relative = 1e-3);
    }
}

#[test]
fn regular_oscillator_commutator_oscillates() {
    // [x(t), x] = −i sin(ωt)/(mω), so C = sin²t for m = ω = 1
    let spec = InvertedOscillatorSpec {
        mass: 1.0,
        instability_rate: 1.0,
        truncation: 64,
        regular: true,
    };
    let model = build_inverted_oscillator(&spec).unwrap();
    let x = model.local_operator(0, "x").unwrap();
    let ground = PureState::basis(model.space(), 0).unwrap();
    let grid = TimeGrid::uniform(0.0, 6.0, 13).unwrap();
    let series = squared_commutator(&model, &x, &x, &ground, &grid).unwrap();
    for (t, value) in series.iter() {
        assert!((value - t.sin().powi(2)).abs() < 1e-10, "t = {t}: {value}");
    }
}

#[test]
fn locality_at_time_zero() {
    let l = 6;
    let model = build_spin_chain(&SpinChainSpec::chaotic(l)).unwrap();
    let rho = DensityMatrix::maximally_mixed(model.space());
    let zero = TimeGrid::new(vec![0.0]).unwrap();
    let w = model.local_operator(0, "Z").unwrap();
    for j in 1..l {
        for label in ["X", "Y", "Z"] {
            let v = model.local_operator(j, label).unwrap();
            let c0 = squared_commutator(&model, &w, &v, &rho, &zero).unwrap().values()[0];
            assert!(c0 < 1e-12, "site {j} {label}: {c0}");
        }
    }
    let profile = support_profile(&model, &w, &zero).unwrap();
    assert_eq!(profile.rows()[0][0], 1.0);
    assert!(profile.rows()[0][1..].iter().all(|&x| x == 0.0));
}

#[test]
fn bell_pair_entropy_is_ln_two() {
    let space = otoc_lab::hilbert::CompositeSpace::qubits(2).unwrap();
    let s = 1.0 / 2f64.sqrt();
    let bell = PureState::new(space, nalgebra::DVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)])).unwrap();
    assert!((entanglement_entropy(&bell, &[0]).unwrap() - LN_2).abs() < 1e-12);
}

#[test]
fn two_qubit_period_from_the_spectrum() {
    // E = −2, 1, 1, 0 for J = 1, h_z = 1/2: gaps 1, 2, 3 → common period 2π
    let spec = SpinChainSpec {
        length: 2,
        coupling: 1.0,
        field_x: 0.0,
        field_z: 0.5,
        boundary: Boundary::Open,
    };
    let period = common_period(&[-2.0, 1.0, 1.0, 0.0], 1e-9).unwrap();
    assert!((period - TAU).abs() < 1e-12);
    let model = build_spin_chain(&spec).unwrap();
    let plus = PureState::normalized(model.space().clone(), nalgebra::DVector::from_element(4, c(1.0))).unwrap();
    let grid = TimeGrid::new(vec![PI, TAU]).unwrap();
    let f = recurrence_fidelity(&model, &plus, &grid).unwrap();
    assert!(f.values()[0] < 1e-12, "half period should be orthogonal here");
    assert!(f.values()[1] > 1.0 - 1e-12);
}

#[test]
fn cat_map_exponent_and_mixing() {
    let cat = TorusMap::Cat;
    let lambda = tangent_lyapunov(&cat, MapState::new(&cat, 0.31, 0.77), 100_000);
    assert!((lambda - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-6);

    // cos 2πx ∘ T^n = cos 2π(a_n x + b_n p) is orthogonal to cos 2πx for n ≥ 1
    let grid = koopman_matrix(&cat, 50).unwrap();
    let f = grid.sample(|x, _| (TAU * x).cos());
    let corr = koopman_correlation(&grid, &f, &f, 5).unwrap();
    assert!((corr.values()[0] - 0.5).abs() < 1e-12);
    assert!(corr.values()[1..].iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn standard_map_exponent_approaches_ln_half_k() {
    let map = TorusMap::standard(10.0).unwrap();
    let lambda = tangent_lyapunov(&map, MapState::new(&map, 1.0, 0.5), 100_000);
    assert!((lambda - (10.0f64 / 2.0).ln()).abs() < 0.05, "{lambda}");
}
