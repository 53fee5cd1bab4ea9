//! Finite-dimensional Hilbert-space machinery.
//!
//! Everything here is dense and double precision. Sites are ordered
//! most-significant first, so `embed_local(space, 0, w)` is `w ⊗ I ⊗ … ⊗ I`.
//! Units are natural (ħ = k_B = 1).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const TOL_HERM: f64 = 1e-10;
pub const TOL_UNITARY: f64 = 1e-10;
pub const TOL_NORM: f64 = 1e-12;
pub const TOL_PSD: f64 = 1e-10;

/// Bytes taken by one dense complex matrix of side `dim`.
pub fn dense_bytes(dim: usize) -> u128 {
    (dim as u128) * (dim as u128) * 16
}

/// Default budget for a single dense matrix (4 GiB).
pub const DEFAULT_MEMORY_CAP: u128 = 4 << 30;

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Ordered tensor-product structure `d_1 ⊗ d_2 ⊗ … ⊗ d_L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompositeSpace {
    site_dims: Vec<usize>,
    total_dim: usize,
}

impl CompositeSpace {
    pub fn new(site_dims: Vec<usize>) -> Result<Self> {
        if site_dims.is_empty() {
            return Err(Error::InvalidSpace("no sites".into()));
        }
        if let Some(d) = site_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("site dimension {d} < 2")));
        }
        let total_dim = site_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidSpace("total dimension overflows".into()))?;
        Ok(Self { site_dims, total_dim })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn num_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn is_qubit_chain(&self) -> bool {
        self.site_dims.iter().all(|&d| d == 2)
    }

    /// Space of `self ⊗ other`.
    pub fn concat(&self, other: &CompositeSpace) -> CompositeSpace {
        let mut dims = self.site_dims.clone();
        dims.extend_from_slice(&other.site_dims);
        CompositeSpace {
            total_dim: self.total_dim * other.total_dim,
            site_dims: dims,
        }
    }

    /// Stride of site `k` in the flattened basis index.
    pub fn stride(&self, site: usize) -> usize {
        self.site_dims[site + 1..].iter().product()
    }

    /// Sorted, deduplicated site list; fails on out-of-range indices.
    fn normalize_sites(&self, sites: &[usize]) -> Result<Vec<usize>> {
        let mut s = sites.to_vec();
        s.sort_unstable();
        s.dedup();
        if let Some(&bad) = s.iter().find(|&&k| k >= self.num_sites()) {
            return Err(Error::SiteOutOfRange {
                site: bad,
                sites: self.num_sites(),
            });
        }
        Ok(s)
    }

    /// Flattened offsets of every multi-index over `sites` (which must be sorted).
    fn offsets(&self, sites: &[usize]) -> Vec<usize> {
        let mut offsets = vec![0usize];
        for &k in sites {
            let stride = self.stride(k);
            let d = self.site_dims[k];
            offsets = offsets
                .iter()
                .flat_map(|&o| (0..d).map(move |i| o + i * stride))
                .collect();
        }
        offsets
    }

    fn sub_space(&self, sites: &[usize]) -> CompositeSpace {
        let dims: Vec<usize> = sites.iter().map(|&k| self.site_dims[k]).collect();
        CompositeSpace {
            total_dim: dims.iter().product(),
            site_dims: dims,
        }
    }

    fn check_dense_budget(&self, cap: u128) -> Result<()> {
        let bytes = dense_bytes(self.total_dim);
        if bytes > cap {
            return Err(Error::MemoryBudget {
                dim: self.total_dim,
                bytes,
                cap,
            });
        }
        Ok(())
    }
}

/// A dense operator on a [`CompositeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: CompositeSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    /// Single-site operator of dimension `matrix.nrows()`.
    pub fn local(matrix: CMatrix) -> Result<Self> {
        let space = CompositeSpace::single(matrix.nrows())?;
        Self::new(space, matrix)
    }

    pub fn identity(space: &CompositeSpace) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(space: &CompositeSpace) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Largest entry modulus of `A − A†`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() < TOL_HERM
    }

    /// Largest entry modulus of `U†U − I`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(d, d)))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() < TOL_UNITARY
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn max_norm(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn apply(&self, state: &PureState) -> Result<CVector> {
        if self.space != state.space {
            return Err(Error::space_mismatch(&self.space, &state.space));
        }
        Ok(&self.matrix * &state.amplitudes)
    }

    pub(crate) fn same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::space_mismatch(&self.space, &other.space));
        }
        Ok(())
    }

    pub(crate) fn with_matrix(&self, matrix: CMatrix) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix,
        }
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    space: CompositeSpace,
    amplitudes: CVector,
}

impl PureState {
    /// Fails unless the squared norm is within `TOL_NORM` of one.
    pub fn new(space: CompositeSpace, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: amplitudes.len(),
            });
        }
        let n2 = amplitudes.norm_squared();
        if (n2 - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("squared norm {n2} is not 1")));
        }
        Ok(Self { space, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(space: CompositeSpace, amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(space, amplitudes.unscale(n))
    }

    pub fn basis(space: &CompositeSpace, index: usize) -> Result<Self> {
        if index >= space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: index + 1,
            });
        }
        let mut v = CVector::zeros(space.total_dim());
        v[index] = C64::new(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            amplitudes: v,
        })
    }

    /// Product basis state with local level `levels[k]` on site `k`.
    pub fn product_basis(space: &CompositeSpace, levels: &[usize]) -> Result<Self> {
        if levels.len() != space.num_sites() {
            return Err(Error::DimensionMismatch {
                expected: space.num_sites(),
                found: levels.len(),
            });
        }
        let mut index = 0;
        for (k, (&l, &d)) in levels.iter().zip(space.site_dims()).enumerate() {
            if l >= d {
                return Err(Error::InvalidState(format!(
                    "level {l} on site {k} exceeds local dimension {d}"
                )));
            }
            index += l * space.stride(k);
        }
        Self::basis(space, index)
    }

    /// Haar-random state from i.i.d. complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(space: &CompositeSpace, rng: &mut R) -> Self {
        let v = CVector::from_fn(space.total_dim(), |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        Self {
            space: space.clone(),
            amplitudes: v.unscale(n),
        }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::space_mismatch(&self.space, &other.space));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            space: self.space.concat(&other.space),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub(crate) fn from_raw(space: CompositeSpace, amplitudes: CVector) -> Self {
        Self { space, amplitudes }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: CompositeSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants. Eigenvalues in `[-TOL_PSD, 0)`
    /// are clamped to zero and the result renormalized (logged as a warning);
    /// anything more negative is rejected.
    pub fn new(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        let herm = op.hermiticity_error();
        if herm >= TOL_HERM {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TOL_NORM || tr.im.abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let Operator { space, matrix } = op;
        let hermitian = (&matrix + matrix.adjoint()).scale(0.5);
        let spectrum = HermitianSpectrum::of_matrix(&hermitian);
        let min = spectrum.eigenvalues().min();
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        if min < 0.0 {
            log::warn!("clamping density-matrix eigenvalue {min:.3e} to zero");
            let clamped = spectrum.eigenvalues().map(|e| e.max(0.0));
            let total = clamped.sum();
            let v = spectrum.eigenvectors();
            let diag = CMatrix::from_diagonal(&clamped.map(|e| C64::new(e / total, 0.0)));
            let matrix = v * diag * v.adjoint();
            return Ok(Self { space, matrix });
        }
        Ok(Self {
            space,
            matrix: hermitian,
        })
    }

    /// `I / d`.
    pub fn maximally_mixed(space: &CompositeSpace) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::identity(d, d).unscale(d as f64),
        }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        HermitianSpectrum::of_matrix(&self.matrix)
            .eigenvalues()
            .iter()
            .copied()
            .collect()
    }

    pub(crate) fn from_raw(space: CompositeSpace, matrix: CMatrix) -> Self {
        Self { space, matrix }
    }
}

/// Borrowed view of either kind of state, accepted wherever an expectation value is taken.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityMatrix),
}

impl StateRef<'_> {
    pub fn space(&self) -> &CompositeSpace {
        match self {
            StateRef::Pure(s) => s.space(),
            StateRef::Mixed(r) => r.space(),
        }
    }
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(s: &'a PureState) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        StateRef::Mixed(r)
    }
}

/// Cached eigendecomposition `H = V diag(E) V†` with ascending `E`.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    pub fn new(h: &Operator) -> Result<Self> {
        let dev = h.hermiticity_error();
        if dev >= TOL_HERM {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self::of_matrix(h.matrix()))
    }

    fn of_matrix(m: &CMatrix) -> Self {
        let eig = m.clone().symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// `V f(E) V†` for a scalar function of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let fe = f(e);
            scaled.column_mut(j).scale_mut_complex(fe);
        }
        scaled * v.adjoint()
    }

    /// Matrix in the eigenbasis: `V† A V`.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    /// Back from the eigenbasis: `V A V†`.
    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        &self.eigenvectors * a * self.eigenvectors.adjoint()
    }
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, s: C64);
}

impl<S> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, s: C64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

/// Kronecker product `a ⊗ b`; the result's sites are `a`'s followed by `b`'s.
pub fn tensor_product(a: &Operator, b: &Operator) -> Operator {
    Operator {
        space: a.space.concat(&b.space),
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

/// `I ⊗ … ⊗ w ⊗ … ⊗ I` with `w` on `site`.
pub fn embed_local(space: &CompositeSpace, site: usize, w: &Operator) -> Result<Operator> {
    if site >= space.num_sites() {
        return Err(Error::SiteOutOfRange {
            site,
            sites: space.num_sites(),
        });
    }
    let d = space.site_dims()[site];
    if w.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: w.dim(),
        });
    }
    let left: usize = space.site_dims()[..site].iter().product();
    let right: usize = space.site_dims()[site + 1..].iter().product();
    let matrix = CMatrix::identity(left, left)
        .kronecker(&w.matrix)
        .kronecker(&CMatrix::identity(right, right));
    Operator::new(space.clone(), matrix)
}

fn split_sites(space: &CompositeSpace, keep_sites: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if keep_sites.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let keep = space.normalize_sites(keep_sites)?;
    let traced = (0..space.num_sites()).filter(|k| !keep.contains(k)).collect();
    Ok((keep, traced))
}

/// Reduced density matrix on `keep_sites` (sorted into ascending site order).
pub fn partial_trace(rho: &DensityMatrix, keep_sites: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    let (keep, traced) = split_sites(space, keep_sites)?;
    let keep_off = space.offsets(&keep);
    let trace_off = space.offsets(&traced);
    let da = keep_off.len();
    let m = rho.matrix();
    let reduced = CMatrix::from_fn(da, da, |a, a2| {
        trace_off.iter().map(|&b| m[(keep_off[a] + b, keep_off[a2] + b)]).sum()
    });
    DensityMatrix::new(space.sub_space(&keep), reduced)
}

/// Amplitudes reshaped into the `d_A × d_B` matrix `M[a, b] = ψ(a, b)`.
pub(crate) fn bipartite_matrix(state: &PureState, keep_sites: &[usize]) -> Result<(CompositeSpace, CMatrix)> {
    let space = state.space();
    let (keep, traced) = split_sites(space, keep_sites)?;
    let keep_off = space.offsets(&keep);
    let trace_off = space.offsets(&traced);
    let psi = state.amplitudes();
    let m = CMatrix::from_fn(keep_off.len(), trace_off.len(), |a, b| psi[keep_off[a] + trace_off[b]]);
    Ok((space.sub_space(&keep), m))
}

/// `Tr_B |ψ⟩⟨ψ|` computed directly from the amplitudes.
pub fn reduced_density(state: &PureState, keep_sites: &[usize]) -> Result<DensityMatrix> {
    let (sub, m) = bipartite_matrix(state, keep_sites)?;
    DensityMatrix::new(sub, &m * m.adjoint())
}

/// `exp(scale · h)` through the eigendecomposition of `h`.
pub fn expm_hermitian(h: &Operator, scale: C64) -> Result<Operator> {
    let spectrum = HermitianSpectrum::new(h)?;
    Ok(h.with_matrix(spectrum.map(|e| (scale * e).exp())))
}

/// `[a, b] = ab − ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.same_space(b)?;
    Ok(a.with_matrix(&a.matrix * &b.matrix - &b.matrix * &a.matrix))
}

/// `⟨ψ|A|ψ⟩` or `Tr(ρA)`.
pub fn expectation<'a>(a: &Operator, state: impl Into<StateRef<'a>>) -> Result<C64> {
    let state = state.into();
    if a.space() != state.space() {
        return Err(Error::space_mismatch(a.space(), state.space()));
    }
    Ok(match state {
        StateRef::Pure(psi) => psi.amplitudes.dotc(&(&a.matrix * &psi.amplitudes)),
        StateRef::Mixed(rho) => trace_product(&rho.matrix, &a.matrix),
    })
}

/// `Tr(AB)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `e^{−βH} / Tr e^{−βH}`.
pub fn gibbs_state(h: &Operator, beta: f64) -> Result<DensityMatrix> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidState(format!(
            "inverse temperature {beta} must be finite and >= 0"
        )));
    }
    let spectrum = HermitianSpectrum::new(h)?;
    Ok(gibbs_from_spectrum(h.space(), &spectrum, beta))
}

pub(crate) fn gibbs_from_spectrum(space: &CompositeSpace, spectrum: &HermitianSpectrum, beta: f64) -> DensityMatrix {
    let e0 = spectrum.eigenvalues().min();
    let z: f64 = spectrum.eigenvalues().iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    let matrix = spectrum.map(|e| C64::new((-beta * (e - e0)).exp() / z, 0.0));
    let matrix = (&matrix + matrix.adjoint()).scale(0.5);
    DensityMatrix::from_raw(space.clone(), matrix)
}

/// Von Neumann entropy `−Σ p ln p` (nats) of a density matrix.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}

pub(crate) fn ensure_dense_budget(space: &CompositeSpace, cap: u128) -> Result<()> {
    space.check_dense_budget(cap)
}

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::{CMatrix, Operator, C64};

    fn op(entries: [[C64; 2]; 2]) -> Operator {
        let m = CMatrix::from_fn(2, 2, |i, j| entries[i][j]);
        Operator::local(m).expect("2x2 is a valid local operator")
    }

    const O: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    pub fn identity() -> Operator {
        op([[ONE, O], [O, ONE]])
    }

    pub fn x() -> Operator {
        op([[O, ONE], [ONE, O]])
    }

    pub fn y() -> Operator {
        op([[O, -I], [I, O]])
    }

    pub fn z() -> Operator {
        op([[ONE, O], [O, -ONE]])
    }

    /// Pauli by label: `I`, `X`, `Y` or `Z` (case-insensitive).
    pub fn by_label(label: &str) -> Option<Operator> {
        match label.to_ascii_uppercase().as_str() {
            "I" => Some(identity()),
            "X" => Some(x()),
            "Y" => Some(y()),
            "Z" => Some(z()),
            _ => None,
        }
    }
}
