use super::engine::{Engine, Slice};
use super::{TimeGrid, TimeSeries};
use crate::error::{Error, Result};
use crate::hilbert::{trace_product, CMatrix, CVector, Operator, StateRef, C64};
use crate::models::ModelInstance;

/// Relative tolerance for the dual-path checks.
pub const VALIDATION_TOL: f64 = 1e-10;

/// The ensemble after transformation into the engine frame.
enum Prepared {
    Pure(CVector),
    /// `None` is the maximally mixed state, whose traces reduce to `Tr(·)/d`.
    Mixed(Option<CMatrix>),
}

fn prepare(engine: &Engine<'_>, state: StateRef<'_>) -> Prepared {
    match state {
        StateRef::Pure(psi) => Prepared::Pure(engine.frame_vec(psi.amplitudes())),
        StateRef::Mixed(rho) => {
            let m = rho.matrix();
            let d = m.nrows();
            let inv = 1.0 / d as f64;
            let is_identity = m.iter().enumerate().all(|(k, z)| {
                let want = if k % (d + 1) == 0 { inv } else { 0.0 };
                (z.re - want).abs() <= f64::EPSILON * inv && z.im == 0.0
            });
            if is_identity {
                Prepared::Mixed(None)
            } else {
                Prepared::Mixed(Some(engine.frame(m)))
            }
        }
    }
}

fn check_spaces(model: &ModelInstance, ops: &[&Operator], state: StateRef<'_>) -> Result<()> {
    for op in ops {
        if op.space() != model.space() {
            return Err(Error::space_mismatch(op.space(), model.space()));
        }
    }
    if state.space() != model.space() {
        return Err(Error::space_mismatch(state.space(), model.space()));
    }
    Ok(())
}

/// `Tr(ρ A B)` with `B ρ` precomputed by the caller when `ρ ≠ I/d`.
fn mixed_pair(rho: &Option<CMatrix>, a: &CMatrix, b: &CMatrix) -> C64 {
    match rho {
        None => trace_product(a, b) / a.nrows() as f64,
        Some(r) => trace_product(a, &(b * r)),
    }
}

/// `⟨A(t) A(0)⟩` on the grid.
pub fn two_point<'a>(
    model: &ModelInstance,
    a: &Operator,
    state: impl Into<StateRef<'a>>,
    grid: &TimeGrid,
) -> Result<TimeSeries<C64>> {
    let state = state.into();
    check_spaces(model, &[a], state)?;
    let engine = Engine::new(model)?;
    engine.check_grid(grid)?;
    let af = engine.frame(a.matrix());
    let values = match prepare(&engine, state) {
        Prepared::Pure(psi) => {
            let a_psi = &af * &psi;
            engine.map_slices(grid, &af, |s| psi.dotc(&s.w(&a_psi)))?
        }
        Prepared::Mixed(rho) => {
            let a_rho = rho.as_ref().map(|r| &af * r);
            engine.map_heisenberg(grid, &af, |_, at| match &a_rho {
                None => trace_product(at, &af) / at.nrows() as f64,
                Some(ar) => trace_product(at, ar),
            })?
        }
    };
    TimeSeries::new(grid.clone(), values)
}

/// `C(t) = ⟨[W(t), V]† [W(t), V]⟩`, nonnegative for every `W`, `V`.
pub fn squared_commutator<'a>(
    model: &ModelInstance,
    w: &Operator,
    v: &Operator,
    state: impl Into<StateRef<'a>>,
    grid: &TimeGrid,
) -> Result<TimeSeries<f64>> {
    let state = state.into();
    check_spaces(model, &[w, v], state)?;
    let engine = Engine::new(model)?;
    engine.check_grid(grid)?;
    let wf = engine.frame(w.matrix());
    let vf = engine.frame(v.matrix());
    let values = match prepare(&engine, state) {
        Prepared::Pure(psi) => {
            let v_psi = &vf * &psi;
            engine.map_slices(grid, &wf, |s| {
                let m_psi = s.w(&v_psi) - &vf * s.w(&psi);
                m_psi.norm_squared()
            })?
        }
        Prepared::Mixed(rho) => engine.map_heisenberg(grid, &wf, |_, wt| {
            let m = wt * &vf - &vf * wt;
            match &rho {
                None => m.norm_squared() / m.nrows() as f64,
                // Tr(ρ M†M) = Σ_ij (Mρ)_ij conj(M_ij)
                Some(r) => (&m * r).dotc(&m).re,
            }
        })?,
    };
    TimeSeries::new(grid.clone(), values)
}

/// `F(t) = ⟨W(t) V W(t) V⟩`, complex in general.
pub fn otoc_f<'a>(
    model: &ModelInstance,
    w: &Operator,
    v: &Operator,
    state: impl Into<StateRef<'a>>,
    grid: &TimeGrid,
) -> Result<TimeSeries<C64>> {
    let state = state.into();
    check_spaces(model, &[w, v], state)?;
    let engine = Engine::new(model)?;
    engine.check_grid(grid)?;
    let wf = engine.frame(w.matrix());
    let vf = engine.frame(v.matrix());
    let values = match prepare(&engine, state) {
        Prepared::Pure(psi) => {
            let v_psi = &vf * &psi;
            let v_adj = vf.adjoint();
            engine.map_slices(grid, &wf, |s| {
                let phi1 = s.w(&v_psi);
                let phi2 = &v_adj * s.w_adj(&psi);
                phi2.dotc(&phi1)
            })?
        }
        Prepared::Mixed(rho) => engine.map_heisenberg(grid, &wf, |_, wt| {
            let y = wt * &vf;
            mixed_pair(&rho, &y, &y)
        })?,
    };
    TimeSeries::new(grid.clone(), values)
}

/// Every route to the squared commutator, evaluated side by side.
#[derive(Clone, Debug)]
pub struct CommutatorValidation {
    /// `⟨M†M⟩` with `M = [W(t), V]`.
    pub positive_form: TimeSeries<f64>,
    /// `−⟨M²⟩`.
    pub hermitian_form: TimeSeries<C64>,
    /// `⟨VW²V⟩ + ⟨WV²W⟩ − ⟨WVWV⟩ − ⟨VWVW⟩`.
    pub four_term: TimeSeries<C64>,
    /// `⟨VW²V⟩ + ⟨WV²W⟩ − 2 Re F`.
    pub otoc_identity: TimeSeries<f64>,
    pub otoc: TimeSeries<C64>,
    /// Largest relative disagreement between the routes.
    pub max_deviation: f64,
}

struct Terms {
    positive: f64,
    hermitian: C64,
    vwwv: C64,
    wvvw: C64,
    wvwv: C64,
    vwvw: C64,
}

fn pure_terms(s: &Slice<'_>, vf: &CMatrix, psi: &CVector, v_psi: &CVector) -> Terms {
    let a = s.w(v_psi); // W(t) V ψ
    let b = vf * s.w(psi); // V W(t) ψ
    let m_psi = &a - &b;
    let mm_psi = s.w(&(vf * &m_psi)) - vf * s.w(&m_psi);
    Terms {
        positive: m_psi.norm_squared(),
        hermitian: -psi.dotc(&mm_psi),
        vwwv: psi.dotc(&(vf * s.w(&a))),
        wvvw: psi.dotc(&s.w(&(vf * &b))),
        wvwv: psi.dotc(&s.w(&(vf * &a))),
        vwvw: psi.dotc(&(vf * s.w(&b))),
    }
}

fn mixed_terms(wt: &CMatrix, vf: &CMatrix, rho: &Option<CMatrix>) -> Terms {
    let y = wt * vf; // W(t) V
    let yp = vf * wt; // V W(t)
    let m = &y - &yp;
    let positive = match rho {
        None => m.norm_squared() / m.nrows() as f64,
        Some(r) => (&m * r).dotc(&m).re,
    };
    Terms {
        positive,
        hermitian: -mixed_pair(rho, &m, &m),
        vwwv: mixed_pair(rho, &yp, &y),
        wvvw: mixed_pair(rho, &y, &yp),
        wvwv: mixed_pair(rho, &y, &y),
        vwvw: mixed_pair(rho, &yp, &yp),
    }
}

fn relative_gap(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Squared commutator computed through every available route, failing with
/// [`Error::Validation`] when the routes disagree beyond `1e-10` (relative to
/// `max(1, |C|)`). `W` and `V` must be Hermitian for the routes to coincide.
pub fn squared_commutator_validated<'a>(
    model: &ModelInstance,
    w: &Operator,
    v: &Operator,
    state: impl Into<StateRef<'a>>,
    grid: &TimeGrid,
) -> Result<CommutatorValidation> {
    let state = state.into();
    check_spaces(model, &[w, v], state)?;
    for op in [w, v] {
        let dev = op.hermiticity_error();
        if dev >= crate::hilbert::TOL_HERM {
            return Err(Error::NotHermitian { deviation: dev });
        }
    }
    let engine = Engine::new(model)?;
    engine.check_grid(grid)?;
    let wf = engine.frame(w.matrix());
    let vf = engine.frame(v.matrix());
    let terms = match prepare(&engine, state) {
        Prepared::Pure(psi) => {
            let v_psi = &vf * &psi;
            engine.map_slices(grid, &wf, |s| pure_terms(s, &vf, &psi, &v_psi))?
        }
        Prepared::Mixed(rho) => engine.map_heisenberg(grid, &wf, |_, wt| mixed_terms(wt, &vf, &rho))?,
    };

    let mut max_deviation = 0.0_f64;
    let mut positive = Vec::with_capacity(terms.len());
    let mut hermitian = Vec::with_capacity(terms.len());
    let mut four = Vec::with_capacity(terms.len());
    let mut ident = Vec::with_capacity(terms.len());
    let mut otoc = Vec::with_capacity(terms.len());
    for t in &terms {
        let c5 = C64::new(t.positive, 0.0);
        let four_term = t.vwwv + t.wvvw - t.wvwv - t.vwvw;
        let identity = (t.vwwv + t.wvvw).re - 2.0 * t.wvwv.re;
        max_deviation = max_deviation
            .max(relative_gap(c5, t.hermitian))
            .max(relative_gap(c5, four_term))
            .max(relative_gap(c5, C64::new(identity, 0.0)));
        positive.push(t.positive);
        hermitian.push(t.hermitian);
        four.push(four_term);
        ident.push(identity);
        otoc.push(t.wvwv);
    }
    if max_deviation > VALIDATION_TOL {
        return Err(Error::Validation {
            check: "squared-commutator routes".into(),
            deviation: max_deviation,
            tolerance: VALIDATION_TOL,
        });
    }
    Ok(CommutatorValidation {
        positive_form: TimeSeries::new(grid.clone(), positive)?,
        hermitian_form: TimeSeries::new(grid.clone(), hermitian)?,
        four_term: TimeSeries::new(grid.clone(), four)?,
        otoc_identity: TimeSeries::new(grid.clone(), ident)?,
        otoc: TimeSeries::new(grid.clone(), otoc)?,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{pauli, tensor_product, CompositeSpace, DensityMatrix, PureState};
    use crate::models::{build_spin_chain, SpinChainSpec};
    use approx::assert_relative_eq;

    fn single_qubit() -> ModelInstance {
        ModelInstance::from_hamiltonian("qubit", pauli::x().scale(C64::new(0.5, 0.0))).unwrap()
    }

    #[test]
    fn single_qubit_closed_form() {
        let m = single_qubit();
        let rho = DensityMatrix::maximally_mixed(m.space());
        let grid = TimeGrid::uniform(0.0, 10.0, 201).unwrap();
        let c = squared_commutator(&m, &pauli::z(), &pauli::z(), &rho, &grid).unwrap();
        for (t, v) in c.iter() {
            assert!((v - 4.0 * t.sin().powi(2)).abs() < 1e-12, "t={t}");
        }
        // the pure-state route sees the same operator identity
        let up = PureState::basis(m.space(), 0).unwrap();
        let cp = squared_commutator(&m, &pauli::z(), &pauli::z(), &up, &grid).unwrap();
        for (t, v) in cp.iter() {
            assert!((v - 4.0 * t.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_sites_commute_at_zero() {
        let m = build_spin_chain(&SpinChainSpec::chaotic(4)).unwrap();
        let rho = DensityMatrix::maximally_mixed(m.space());
        let w = m.local_operator(0, "Z").unwrap();
        let grid = TimeGrid::new(vec![0.0]).unwrap();
        for j in 1..4 {
            let v = m.local_operator(j, "X").unwrap();
            let c = squared_commutator(&m, &w, &v, &rho, &grid).unwrap();
            assert!(c.values()[0].abs() < 1e-12);
        }
    }

    #[test]
    fn otoc_trivial_cases() {
        let s = CompositeSpace::qubits(2).unwrap();
        let h = tensor_product(&pauli::x(), &pauli::x())
            .add(&tensor_product(&pauli::z(), &pauli::identity()))
            .unwrap();
        let m = ModelInstance::from_hamiltonian("pair", h).unwrap();
        let rho = DensityMatrix::maximally_mixed(&s);
        let grid = TimeGrid::uniform(0.0, 2.0, 5).unwrap();
        let w = tensor_product(&pauli::z(), &pauli::identity());
        let v = tensor_product(&pauli::identity(), &pauli::z());
        let f = otoc_f(&m, &w, &v, &rho, &grid).unwrap();
        assert_relative_eq!(f.values()[0].re, 1.0, epsilon = 1e-14);
        let id = Operator::identity(&s);
        let f = otoc_f(&m, &id, &id, &rho, &grid).unwrap();
        assert!(f.values().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-13));
        let tp = two_point(&m, &id, &rho, &grid).unwrap();
        assert!(tp.values().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-13));
    }

    #[test]
    fn validated_paths_agree_for_gibbs_and_pure() {
        let m = build_spin_chain(&SpinChainSpec::chaotic(4)).unwrap();
        let w = m.local_operator(0, "Z").unwrap();
        let v = m.local_operator(3, "X").unwrap();
        let grid = TimeGrid::uniform(0.0, 4.0, 9).unwrap();
        let gibbs = crate::hilbert::gibbs_state(m.hamiltonian().unwrap(), 0.7).unwrap();
        let r = squared_commutator_validated(&m, &w, &v, &gibbs, &grid).unwrap();
        assert!(r.max_deviation < 1e-10);
        let plain = squared_commutator(&m, &w, &v, &gibbs, &grid).unwrap();
        for (a, b) in plain.values().iter().zip(r.positive_form.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let psi = PureState::product_basis(m.space(), &[0, 1, 0, 1]).unwrap();
        let r = squared_commutator_validated(&m, &w, &v, &psi, &grid).unwrap();
        assert!(r.max_deviation < 1e-10);
        let f = otoc_f(&m, &w, &v, &psi, &grid).unwrap();
        for (a, b) in f.values().iter().zip(r.otoc.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_non_hermitian() {
        let m = single_qubit();
        let rho = DensityMatrix::maximally_mixed(m.space());
        let sigma_plus = pauli::x().add(&pauli::y().scale(C64::new(0.0, 1.0))).unwrap();
        let grid = TimeGrid::kicks(1);
        assert!(matches!(
            squared_commutator_validated(&m, &sigma_plus, &pauli::z(), &rho, &grid),
            Err(Error::NotHermitian { .. })
        ));
        // the positive form is still defined and nonnegative
        let c = squared_commutator(&m, &sigma_plus, &pauli::z(), &rho, &grid).unwrap();
        assert!(c.values().iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn space_mismatch_is_reported() {
        let m = single_qubit();
        let other = Operator::identity(&CompositeSpace::qubits(2).unwrap());
        let rho = DensityMatrix::maximally_mixed(m.space());
        let grid = TimeGrid::kicks(1);
        assert!(matches!(
            squared_commutator(&m, &other, &pauli::z(), &rho, &grid),
            Err(Error::SpaceMismatch { .. })
        ));
        assert!(matches!(
            two_point(&m, &other, &rho, &grid),
            Err(Error::SpaceMismatch { .. })
        ));
    }
}
