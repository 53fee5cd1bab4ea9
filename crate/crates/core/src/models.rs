//! Builders for the quantum model families: the mixed-field Ising chain, the
//! quantum kicked rotor and the (inverted) harmonic oscillator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed_local, ensure_dense_budget, expm_hermitian, pauli, CMatrix, CVector, CompositeSpace, Operator, PureState,
    C64, DEFAULT_MEMORY_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// `H = −J Σ Z_i Z_{i+1} − h_x Σ X_i − h_z Σ Z_i` on `length` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinChainSpec {
    pub length: usize,
    #[serde(default = "SpinChainSpec::default_coupling")]
    pub coupling: f64,
    #[serde(default)]
    pub field_x: f64,
    #[serde(default)]
    pub field_z: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl SpinChainSpec {
    fn default_coupling() -> f64 {
        1.0
    }

    /// Nonintegrable parameters `J = 1, h_x = 1.05, h_z = 0.5`.
    pub fn chaotic(length: usize) -> Self {
        Self {
            length,
            coupling: 1.0,
            field_x: 1.05,
            field_z: 0.5,
            boundary: Boundary::Open,
        }
    }

    /// Transverse-field Ising point `J = 1, h_x = 1, h_z = 0`.
    pub fn integrable(length: usize) -> Self {
        Self {
            length,
            coupling: 1.0,
            field_x: 1.0,
            field_z: 0.0,
            boundary: Boundary::Open,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::InvalidSpec(format!("chain length {} < 2", self.length)));
        }
        if ![self.coupling, self.field_x, self.field_z]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidSpec("chain parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn dimension(&self) -> Option<usize> {
        1usize.checked_shl(self.length as u32).filter(|_| self.length < 64)
    }
}

/// One-period kicked rotor on a symmetric momentum window of `basis_size` states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickedRotorSpec {
    pub kick_strength: f64,
    pub effective_planck: f64,
    pub basis_size: usize,
}

impl KickedRotorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.basis_size < 3 || self.basis_size.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!(
                "rotor basis size {} must be odd and >= 3",
                self.basis_size
            )));
        }
        if !(self.kick_strength >= 0.0) || !self.kick_strength.is_finite() {
            return Err(Error::InvalidSpec("kick strength must be finite and >= 0".into()));
        }
        if !(self.effective_planck > 0.0) || !self.effective_planck.is_finite() {
            return Err(Error::InvalidSpec("effective Planck constant must be > 0".into()));
        }
        Ok(())
    }

    /// Largest momentum quantum number `(N − 1) / 2`.
    pub fn max_quantum_number(&self) -> i64 {
        (self.basis_size as i64 - 1) / 2
    }
}

/// `H = p²/2m ∓ mλ²x²/2` on a truncated Fock basis of the reference oscillator `ω_ref = λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertedOscillatorSpec {
    #[serde(default = "InvertedOscillatorSpec::default_one")]
    pub mass: f64,
    #[serde(default = "InvertedOscillatorSpec::default_one")]
    pub instability_rate: f64,
    pub truncation: usize,
    /// Build the ordinary (stable) oscillator instead.
    #[serde(default)]
    pub regular: bool,
}

impl InvertedOscillatorSpec {
    fn default_one() -> f64 {
        1.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation < 16 {
            return Err(Error::InvalidSpec(format!("Fock truncation {} < 16", self.truncation)));
        }
        if !(self.mass > 0.0 && self.instability_rate > 0.0)
            || !self.mass.is_finite()
            || !self.instability_rate.is_finite()
        {
            return Err(Error::InvalidSpec("mass and instability rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Echo of the spec a [`ModelInstance`] was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    SpinChain(SpinChainSpec),
    KickedRotor(KickedRotorSpec),
    InvertedOscillator(InvertedOscillatorSpec),
    /// Hand-built Hamiltonian, e.g. a single qubit.
    Custom {
        name: String,
    },
}

#[derive(Clone, Debug)]
pub enum Generator {
    Hamiltonian(Operator),
    Floquet(Operator),
}

/// A built model: generator, space and local-operator factory.
#[derive(Clone, Debug)]
pub struct ModelInstance {
    space: CompositeSpace,
    generator: Generator,
    spec: ModelSpec,
}

/// Phase-space point `(q, p)`: `(θ, p)` for the rotor, `(x, p)` for the oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl ModelInstance {
    /// Wraps a Hermitian operator as a model with no local-operator families
    /// beyond single-qubit Paulis (when the space is a qubit chain).
    pub fn from_hamiltonian(name: impl Into<String>, h: Operator) -> Result<Self> {
        let dev = h.hermiticity_error();
        if dev >= crate::hilbert::TOL_HERM {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self {
            space: h.space().clone(),
            generator: Generator::Hamiltonian(h),
            spec: ModelSpec::Custom { name: name.into() },
        })
    }

    /// Wraps a unitary as a Floquet model.
    pub fn from_floquet(name: impl Into<String>, u: Operator) -> Result<Self> {
        let dev = u.unitarity_error();
        if dev >= crate::hilbert::TOL_UNITARY {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self {
            space: u.space().clone(),
            generator: Generator::Floquet(u),
            spec: ModelSpec::Custom { name: name.into() },
        })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> Option<&Operator> {
        match &self.generator {
            Generator::Hamiltonian(h) => Some(h),
            Generator::Floquet(_) => None,
        }
    }

    pub fn floquet_unitary(&self) -> Option<&Operator> {
        match &self.generator {
            Generator::Floquet(u) => Some(u),
            Generator::Hamiltonian(_) => None,
        }
    }

    pub fn is_floquet(&self) -> bool {
        matches!(self.generator, Generator::Floquet(_))
    }

    /// Named local operator.
    ///
    /// * qubit chains: `I`, `X`, `Y`, `Z` on `site`
    /// * kicked rotor (site 0): `p`, `p2`, `cos`, `sin`
    /// * oscillator (site 0): `x`, `p`, `u = (x + p/mλ)/√2`, `n`, `a`, `adag`
    pub fn local_operator(&self, site: usize, label: &str) -> Result<Operator> {
        match &self.spec {
            ModelSpec::KickedRotor(spec) => {
                single_site(site)?;
                rotor_operator(spec, label)
            }
            ModelSpec::InvertedOscillator(spec) => {
                single_site(site)?;
                oscillator_operator(spec, label)
            }
            ModelSpec::SpinChain(_) | ModelSpec::Custom { .. } => {
                if !self.space.is_qubit_chain() {
                    return Err(Error::Unsupported(format!(
                        "no local operator '{label}' for this model"
                    )));
                }
                let w = pauli::by_label(label)
                    .ok_or_else(|| Error::Unsupported(format!("unknown qubit operator label '{label}'")))?;
                embed_local(&self.space, site, &w)
            }
        }
    }

    /// Global spin flip `Π_i X_i` on a qubit chain.
    pub fn spin_flip(&self) -> Result<Operator> {
        if !self.space.is_qubit_chain() {
            return Err(Error::Unsupported("spin flip needs a qubit chain".into()));
        }
        let d = self.space.total_dim();
        let mut m = CMatrix::zeros(d, d);
        for s in 0..d {
            m[(s ^ (d - 1), s)] = C64::new(1.0, 0.0);
        }
        Operator::new(self.space.clone(), m)
    }
}

fn single_site(site: usize) -> Result<()> {
    if site != 0 {
        return Err(Error::SiteOutOfRange { site, sites: 1 });
    }
    Ok(())
}

pub fn build_spin_chain(spec: &SpinChainSpec) -> Result<ModelInstance> {
    build_spin_chain_with_cap(spec, DEFAULT_MEMORY_CAP)
}

pub fn build_spin_chain_with_cap(spec: &SpinChainSpec, memory_cap: u128) -> Result<ModelInstance> {
    spec.validate()?;
    let l = spec.length;
    let dim = spec.dimension().ok_or(Error::MemoryBudget {
        dim: usize::MAX,
        bytes: u128::MAX,
        cap: memory_cap,
    })?;
    let space = CompositeSpace::qubits(l)?;
    ensure_dense_budget(&space, memory_cap)?;

    // site k ↔ bit (l − 1 − k); bit 0 is Z = +1
    let z = |s: usize, k: usize| -> f64 {
        if (s >> (l - 1 - k)) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let bonds: Vec<(usize, usize)> = match spec.boundary {
        Boundary::Open => (0..l - 1).map(|k| (k, k + 1)).collect(),
        Boundary::Periodic if l > 2 => (0..l).map(|k| (k, (k + 1) % l)).collect(),
        // a periodic pair would double-count its single bond
        Boundary::Periodic => vec![(0, 1)],
    };
    let mut h = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let zz: f64 = bonds.iter().map(|&(a, b)| z(s, a) * z(s, b)).sum();
        let zf: f64 = (0..l).map(|k| z(s, k)).sum();
        h[(s, s)] = C64::new(-spec.coupling * zz - spec.field_z * zf, 0.0);
        for k in 0..l {
            h[(s ^ (1 << (l - 1 - k)), s)] += C64::new(-spec.field_x, 0.0);
        }
    }
    Ok(ModelInstance {
        space: space.clone(),
        generator: Generator::Hamiltonian(Operator::new(space, h)?),
        spec: ModelSpec::SpinChain(spec.clone()),
    })
}

fn rotor_quantum_numbers(spec: &KickedRotorSpec) -> impl Iterator<Item = i64> {
    let m = spec.max_quantum_number();
    -m..=m
}

fn rotor_operator(spec: &KickedRotorSpec, label: &str) -> Result<Operator> {
    let n = spec.basis_size;
    let space = CompositeSpace::single(n)?;
    let hbar = spec.effective_planck;
    let half = C64::new(0.5, 0.0);
    let m = match label {
        "p" => CMatrix::from_diagonal(&CVector::from_iterator(
            n,
            rotor_quantum_numbers(spec).map(|q| C64::new(q as f64 * hbar, 0.0)),
        )),
        "p2" => CMatrix::from_diagonal(&CVector::from_iterator(
            n,
            rotor_quantum_numbers(spec).map(|q| C64::new((q as f64 * hbar).powi(2), 0.0)),
        )),
        // e^{±iθ} shift momentum by one quantum, periodically closed at the window edge
        "cos" => CMatrix::from_fn(n, n, |i, j| {
            if (i + 1) % n == j || (j + 1) % n == i {
                half
            } else {
                C64::new(0.0, 0.0)
            }
        }),
        "sin" => CMatrix::from_fn(n, n, |i, j| {
            // ⟨m|sin θ|m'⟩ = (δ_{m, m'+1} − δ_{m, m'−1}) / 2i
            let mut v = C64::new(0.0, 0.0);
            if i == (j + 1) % n {
                v += C64::new(0.0, -0.5);
            }
            if (i + 1) % n == j {
                v += C64::new(0.0, 0.5);
            }
            v
        }),
        _ => return Err(Error::Unsupported(format!("unknown rotor operator label '{label}'"))),
    };
    Operator::new(space, m)
}

pub fn build_kicked_rotor(spec: &KickedRotorSpec) -> Result<ModelInstance> {
    spec.validate()?;
    let n = spec.basis_size;
    let space = CompositeSpace::single(n)?;
    ensure_dense_budget(&space, DEFAULT_MEMORY_CAP)?;
    let hbar = spec.effective_planck;
    let kappa = spec.kick_strength / hbar;

    // Kick in the momentum basis: F† diag(e^{-iκ cos θ_j}) F on the N-point angle
    // grid, which is circulant in (m − m') mod N.
    let circulant: Vec<C64> = (0..n)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let theta = 2.0 * PI * j as f64 / n as f64;
                    C64::new(0.0, -kappa * theta.cos() + k as f64 * theta).exp()
                })
                .sum::<C64>()
                / n as f64
        })
        .collect();
    let kick = CMatrix::from_fn(n, n, |i, j| circulant[(j + n - i) % n]);

    let free: Vec<C64> = rotor_quantum_numbers(spec)
        .map(|q| {
            let p = q as f64 * hbar;
            C64::new(0.0, -p * p / (2.0 * hbar)).exp()
        })
        .collect();
    let mut u = kick;
    for (i, phase) in free.iter().enumerate() {
        u.row_mut(i).iter_mut().for_each(|z| *z *= phase);
    }
    let u = Operator::new(space.clone(), u)?;
    Ok(ModelInstance {
        space,
        generator: Generator::Floquet(u),
        spec: ModelSpec::KickedRotor(spec.clone()),
    })
}

/// Truncated annihilation operator on `n` Fock levels.
fn annihilation(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

struct Quadratures {
    x: CMatrix,
    p: CMatrix,
}

fn quadratures(spec: &InvertedOscillatorSpec) -> Quadratures {
    let a = annihilation(spec.truncation);
    let ad = a.adjoint();
    let mw = spec.mass * spec.instability_rate;
    Quadratures {
        x: (&a + &ad) * C64::new((1.0 / (2.0 * mw)).sqrt(), 0.0),
        p: (&ad - &a) * C64::new(0.0, (mw / 2.0).sqrt()),
    }
}

fn oscillator_operator(spec: &InvertedOscillatorSpec, label: &str) -> Result<Operator> {
    let space = CompositeSpace::single(spec.truncation)?;
    let n = spec.truncation;
    let m = match label {
        "x" => quadratures(spec).x,
        "p" => quadratures(spec).p,
        // unstable-manifold coordinate (x + p/mλ)/√2, which grows as e^{λt}
        "u" => {
            let q = quadratures(spec);
            let mw = spec.mass * spec.instability_rate;
            (q.x + q.p * C64::new(1.0 / mw, 0.0)) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        }
        "a" => annihilation(n),
        "adag" => annihilation(n).adjoint(),
        "n" => CMatrix::from_diagonal(&CVector::from_iterator(n, (0..n).map(|k| C64::new(k as f64, 0.0)))),
        _ => {
            return Err(Error::Unsupported(format!(
                "unknown oscillator operator label '{label}'"
            )))
        }
    };
    Operator::new(space, m)
}

pub fn build_inverted_oscillator(spec: &InvertedOscillatorSpec) -> Result<ModelInstance> {
    spec.validate()?;
    let space = CompositeSpace::single(spec.truncation)?;
    ensure_dense_budget(&space, DEFAULT_MEMORY_CAP)?;
    let Quadratures { x, p } = quadratures(spec);
    let sign = if spec.regular { 1.0 } else { -1.0 };
    let m = spec.mass;
    let lam = spec.instability_rate;
    let h = (&p * &p) * C64::new(1.0 / (2.0 * m), 0.0) + (&x * &x) * C64::new(sign * m * lam * lam / 2.0, 0.0);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    Ok(ModelInstance {
        space: space.clone(),
        generator: Generator::Hamiltonian(Operator::new(space, h)?),
        spec: ModelSpec::InvertedOscillator(spec.clone()),
    })
}

/// Normalized Gaussian packet centred at `center`.
///
/// `width = 1` is the minimum-uncertainty packet with equal spread in both
/// quadratures (`√(ħ/2)` for the rotor, the reference ground state for the
/// oscillator); other widths scale the position/angle spread by `width`.
pub fn coherent_wavepacket(model: &ModelInstance, center: PhasePoint, width: f64) -> Result<PureState> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::InvalidState(format!("packet width {width} must be > 0")));
    }
    match model.spec() {
        ModelSpec::KickedRotor(spec) => {
            let hbar = spec.effective_planck;
            let sigma_p = (hbar / 2.0).sqrt() / width;
            let amps = CVector::from_iterator(
                spec.basis_size,
                rotor_quantum_numbers(spec).map(|q| {
                    let p = q as f64 * hbar;
                    let g = (-(p - center.p).powi(2) / (4.0 * sigma_p * sigma_p)).exp();
                    C64::from_polar(g, -(q as f64) * center.q)
                }),
            );
            PureState::normalized(model.space().clone(), amps)
        }
        ModelSpec::InvertedOscillator(spec) => {
            let n = spec.truncation;
            let a = annihilation(n);
            let ad = a.adjoint();
            let mw = spec.mass * spec.instability_rate;
            let alpha = C64::new((mw / 2.0).sqrt() * center.q, center.p / (2.0 * mw).sqrt());
            let mut psi = CVector::zeros(n);
            psi[0] = C64::new(1.0, 0.0);
            let space = model.space().clone();
            if (width - 1.0).abs() > 0.0 {
                // S(r) = exp(r (a² − a†²) / 2) narrows x by e^{-r}
                let r = -width.ln();
                let gen = (&a * &a - &ad * &ad) * C64::new(r / 2.0, 0.0);
                psi = exp_antihermitian(&space, &gen)? * psi;
            }
            if alpha.norm() > 0.0 {
                let gen = &ad * alpha - &a * alpha.conj();
                psi = exp_antihermitian(&space, &gen)? * psi;
            }
            PureState::normalized(space, psi)
        }
        _ => Err(Error::Unsupported(
            "wavepackets are defined for the rotor and oscillator families".into(),
        )),
    }
}

/// `exp(A)` for anti-Hermitian `A`, via the Hermitian `−iA`.
fn exp_antihermitian(space: &CompositeSpace, a: &CMatrix) -> Result<CMatrix> {
    let k = Operator::new(space.clone(), a * C64::new(0.0, -1.0))?;
    Ok(expm_hermitian(&k, C64::new(0.0, 1.0))?.into_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{commutator, expectation, HermitianSpectrum};
    use approx::assert_relative_eq;

    fn eigenvalues(op: &Operator) -> Vec<f64> {
        HermitianSpectrum::new(op)
            .unwrap()
            .eigenvalues()
            .iter()
            .copied()
            .collect()
    }

    #[test]
    fn two_site_zz_spectrum() {
        let spec = SpinChainSpec {
            length: 2,
            coupling: 1.0,
            field_x: 0.0,
            field_z: 0.0,
            boundary: Boundary::Open,
        };
        let m = build_spin_chain(&spec).unwrap();
        let e = eigenvalues(m.hamiltonian().unwrap());
        let want = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in e.iter().zip(want) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        // H = -Z⊗Z exactly
        let zz = crate::hilbert::tensor_product(&pauli::z(), &pauli::z()).scale(C64::new(-1.0, 0.0));
        assert!(m.hamiltonian().unwrap().sub(&zz).unwrap().max_norm() < 1e-15);
    }

    #[test]
    fn noninteracting_field_spectrum() {
        let spec = SpinChainSpec {
            length: 2,
            coupling: 0.0,
            field_x: 1.0,
            field_z: 0.0,
            boundary: Boundary::Open,
        };
        let e = eigenvalues(build_spin_chain(&spec).unwrap().hamiltonian().unwrap());
        // direct sum of two single-site spectra {−1, +1}
        let want = [-2.0, 0.0, 0.0, 2.0];
        for (a, b) in e.iter().zip(want) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn chain_matches_kronecker_construction() {
        let spec = SpinChainSpec {
            length: 3,
            coupling: 0.7,
            field_x: 1.3,
            field_z: -0.4,
            boundary: Boundary::Periodic,
        };
        let m = build_spin_chain(&spec).unwrap();
        let s = m.space().clone();
        let mut h = Operator::zeros(&s);
        let z = |k| embed_local(&s, k, &pauli::z()).unwrap();
        let x = |k| embed_local(&s, k, &pauli::x()).unwrap();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            h = h.add(&z(a).compose(&z(b)).unwrap().scale(C64::new(-0.7, 0.0))).unwrap();
        }
        for k in 0..3 {
            h = h.add(&x(k).scale(C64::new(-1.3, 0.0))).unwrap();
            h = h.add(&z(k).scale(C64::new(0.4, 0.0))).unwrap();
        }
        assert!(m.hamiltonian().unwrap().sub(&h).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn chain_is_hermitian_and_flip_symmetric() {
        let m = build_spin_chain(&SpinChainSpec::integrable(5)).unwrap();
        let h = m.hamiltonian().unwrap();
        assert!(h.hermiticity_error() < 1e-12);
        let p = m.spin_flip().unwrap();
        assert!(commutator(h, &p).unwrap().max_norm() < 1e-10);
        let chaotic = build_spin_chain(&SpinChainSpec::chaotic(5)).unwrap();
        assert!(commutator(chaotic.hamiltonian().unwrap(), &p).unwrap().max_norm() > 0.1);
    }

    #[test]
    fn chain_memory_budget_is_reported() {
        let spec = SpinChainSpec::chaotic(20);
        match build_spin_chain(&spec) {
            Err(Error::MemoryBudget { dim, .. }) => assert_eq!(dim, 1 << 20),
            other => panic!("expected a budget refusal, got {other:?}"),
        }
        assert!(build_spin_chain(&SpinChainSpec::chaotic(1)).is_err());
    }

    #[test]
    fn free_rotor_is_diagonal() {
        let spec = KickedRotorSpec {
            kick_strength: 0.0,
            effective_planck: 0.3,
            basis_size: 21,
        };
        let u = build_kicked_rotor(&spec).unwrap();
        let u = u.floquet_unitary().unwrap();
        for i in 0..21 {
            for j in 0..21 {
                if i != j {
                    assert!(u.matrix()[(i, j)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rotor_is_unitary_and_rejects_even_basis() {
        for k in [0.5, 3.0, 10.0] {
            let spec = KickedRotorSpec {
                kick_strength: k,
                effective_planck: 0.1,
                basis_size: 101,
            };
            let m = build_kicked_rotor(&spec).unwrap();
            assert!(m.floquet_unitary().unwrap().unitarity_error() < 1e-10);
        }
        let even = KickedRotorSpec {
            kick_strength: 1.0,
            effective_planck: 0.1,
            basis_size: 10,
        };
        assert!(matches!(build_kicked_rotor(&even), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn rotor_cos_on_three_states() {
        let spec = KickedRotorSpec {
            kick_strength: 0.01,
            effective_planck: 1.0,
            basis_size: 3,
        };
        let m = build_kicked_rotor(&spec).unwrap();
        let cos = m.local_operator(0, "cos").unwrap();
        // explicit construction: every pair of the 3 momenta is one quantum apart mod 3
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 0.5 };
                assert_relative_eq!(cos.matrix()[(i, j)].re, want, epsilon = 1e-15);
            }
        }
        // the kick factor is exactly exp(-i K/ħ cos θ) in this basis
        let kick = expm_hermitian(&cos, C64::new(0.0, -0.01)).unwrap();
        let p2 = m.local_operator(0, "p2").unwrap();
        let free = expm_hermitian(&p2, C64::new(0.0, -0.5)).unwrap();
        let u = free.compose(&kick).unwrap();
        assert!(u.sub(m.floquet_unitary().unwrap()).unwrap().max_norm() < 1e-13);
    }

    #[test]
    fn regular_oscillator_spectrum() {
        let spec = InvertedOscillatorSpec {
            mass: 1.3,
            instability_rate: 0.8,
            truncation: 40,
            regular: true,
        };
        let m = build_inverted_oscillator(&spec).unwrap();
        let e = eigenvalues(m.hamiltonian().unwrap());
        // truncated diagonalization: λ(n + ½) for n well below the edge
        for (n, &level) in e.iter().take(20).enumerate() {
            assert_relative_eq!(level, 0.8 * (n as f64 + 0.5), epsilon = 1e-10);
        }
    }

    #[test]
    fn canonical_commutator_on_interior() {
        let spec = InvertedOscillatorSpec {
            mass: 1.0,
            instability_rate: 1.0,
            truncation: 32,
            regular: false,
        };
        let m = build_inverted_oscillator(&spec).unwrap();
        let x = m.local_operator(0, "x").unwrap();
        let p = m.local_operator(0, "p").unwrap();
        let c = commutator(&x, &p).unwrap();
        let n = 32;
        let mut interior = 0.0_f64;
        for i in 0..n - 2 {
            for j in 0..n - 2 {
                let want = if i == j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) };
                interior = interior.max((c.matrix()[(i, j)] - want).norm());
            }
        }
        assert!(interior < 1e-10);
    }

    #[test]
    fn inverted_spectrum_unbounded_below() {
        let mins: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let spec = InvertedOscillatorSpec {
                    mass: 1.0,
                    instability_rate: 1.0,
                    truncation: n,
                    regular: false,
                };
                eigenvalues(build_inverted_oscillator(&spec).unwrap().hamiltonian().unwrap())[0]
            })
            .collect();
        assert!(mins[0] > mins[1] && mins[1] > mins[2], "{mins:?}");
    }

    #[test]
    fn wavepackets() {
        let rotor = build_kicked_rotor(&KickedRotorSpec {
            kick_strength: 1.0,
            effective_planck: 0.1,
            basis_size: 101,
        })
        .unwrap();
        let psi = coherent_wavepacket(&rotor, PhasePoint { q: 0.0, p: 0.0 }, 1.0).unwrap();
        assert_relative_eq!(psi.amplitudes().norm_squared(), 1.0, epsilon = 1e-12);
        let p = rotor.local_operator(0, "p").unwrap();
        assert!(expectation(&p, &psi).unwrap().norm() < 1e-12);

        // the packet sits at the requested angle
        let theta0 = 1.1;
        let psi = coherent_wavepacket(&rotor, PhasePoint { q: theta0, p: 0.7 }, 1.0).unwrap();
        let c = expectation(&rotor.local_operator(0, "cos").unwrap(), &psi).unwrap().re;
        let s = expectation(&rotor.local_operator(0, "sin").unwrap(), &psi).unwrap().re;
        assert_relative_eq!(s.atan2(c), theta0, epsilon = 1e-6);
        assert_relative_eq!(expectation(&p, &psi).unwrap().re, 0.7, epsilon = 1e-6);

        let osc = build_inverted_oscillator(&InvertedOscillatorSpec {
            mass: 1.0,
            instability_rate: 1.0,
            truncation: 32,
            regular: false,
        })
        .unwrap();
        let g = coherent_wavepacket(&osc, PhasePoint { q: 0.0, p: 0.0 }, 1.0).unwrap();
        assert_eq!(g.amplitudes()[0], C64::new(1.0, 0.0));
        let d = coherent_wavepacket(&osc, PhasePoint { q: 1.0, p: -0.5 }, 1.0).unwrap();
        let x = osc.local_operator(0, "x").unwrap();
        let pp = osc.local_operator(0, "p").unwrap();
        assert_relative_eq!(expectation(&x, &d).unwrap().re, 1.0, epsilon = 1e-8);
        assert_relative_eq!(expectation(&pp, &d).unwrap().re, -0.5, epsilon = 1e-8);
        let sq = coherent_wavepacket(&osc, PhasePoint { q: 0.0, p: 0.0 }, 0.5).unwrap();
        let x2 = x.compose(&x).unwrap();
        // squeezing is exact only up to the Fock cutoff
        assert_relative_eq!(expectation(&x2, &sq).unwrap().re, 0.25 * 0.5, epsilon = 1e-5);

        let chain = build_spin_chain(&SpinChainSpec::chaotic(3)).unwrap();
        assert!(matches!(
            coherent_wavepacket(&chain, PhasePoint { q: 0.0, p: 0.0 }, 1.0),
            Err(Error::Unsupported(_))
        ));
    }
}
