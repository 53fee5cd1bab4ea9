use rayon::prelude::*;

use super::{kick_count, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, CVector, HermitianSpectrum, Operator, C64};
use crate::models::{Generator, ModelInstance};

/// Time-evolution backend shared by every diagnostic.
///
/// Hamiltonian models are diagonalized once and all work happens in the
/// energy eigenbasis (the "frame"); Floquet models stay in the computational
/// basis and step one period at a time.
pub(crate) enum Engine<'m> {
    Spectral(HermitianSpectrum),
    Floquet { u: &'m CMatrix, u_adj: CMatrix },
}

impl<'m> Engine<'m> {
    pub fn new(model: &'m ModelInstance) -> Result<Self> {
        Ok(match model.generator() {
            Generator::Hamiltonian(h) => Engine::Spectral(HermitianSpectrum::new(h)?),
            Generator::Floquet(u) => Engine::Floquet {
                u: u.matrix(),
                u_adj: u.matrix().adjoint(),
            },
        })
    }

    pub fn frame(&self, m: &CMatrix) -> CMatrix {
        match self {
            Engine::Spectral(s) => s.to_eigenbasis(m),
            Engine::Floquet { .. } => m.clone(),
        }
    }

    pub fn frame_vec(&self, v: &CVector) -> CVector {
        match self {
            Engine::Spectral(s) => s.eigenvectors().adjoint() * v,
            Engine::Floquet { .. } => v.clone(),
        }
    }

    pub fn unframe(&self, m: &CMatrix) -> CMatrix {
        match self {
            Engine::Spectral(s) => s.from_eigenbasis(m),
            Engine::Floquet { .. } => m.clone(),
        }
    }

    pub fn unframe_vec(&self, v: &CVector) -> CVector {
        match self {
            Engine::Spectral(s) => s.eigenvectors() * v,
            Engine::Floquet { .. } => v.clone(),
        }
    }

    pub fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if let Engine::Floquet { .. } = self {
            grid.kick_counts()?;
        }
        Ok(())
    }

    fn phases(spectrum: &HermitianSpectrum, t: f64) -> CVector {
        spectrum.eigenvalues().map(|e| C64::new(0.0, -e * t).exp())
    }

    /// `W(t) = U(t)† W U(t)` in the frame.
    fn evolve_spectral(spectrum: &HermitianSpectrum, w: &CMatrix, t: f64) -> CMatrix {
        let d = Self::phases(spectrum, t);
        CMatrix::from_fn(w.nrows(), w.ncols(), |m, n| d[m].conj() * w[(m, n)] * d[n])
    }

    fn kick(u: &CMatrix, u_adj: &CMatrix, w: &CMatrix) -> CMatrix {
        u_adj * (w * u)
    }

    /// Applies `f` to the frame operator `W(t_k)` for every grid time, in grid order.
    ///
    /// Spectral evaluations are independent and run in parallel; Floquet
    /// evaluations advance one shared operator through the kicks.
    pub fn map_heisenberg<R, F>(&self, grid: &TimeGrid, w: &CMatrix, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(f64, &CMatrix) -> R + Sync + Send,
    {
        match self {
            Engine::Spectral(s) => Ok(grid
                .times()
                .par_iter()
                .map(|&t| f(t, &Self::evolve_spectral(s, w, t)))
                .collect()),
            Engine::Floquet { u, u_adj } => {
                let counts = grid.kick_counts()?;
                let mut current = w.clone();
                let mut at = 0u32;
                let mut out = Vec::with_capacity(counts.len());
                for n in counts {
                    while at < n {
                        current = Self::kick(u, u_adj, &current);
                        at += 1;
                    }
                    out.push(f(f64::from(n), &current));
                }
                Ok(out)
            }
        }
    }

    /// Applies `f` to a vector-level view of `W(t_k)` for every grid time.
    pub fn map_slices<R, F>(&self, grid: &TimeGrid, w: &CMatrix, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&Slice<'_>) -> R + Sync + Send,
    {
        let w_adj = w.adjoint();
        match self {
            Engine::Spectral(s) => Ok(grid
                .times()
                .par_iter()
                .map(|&t| {
                    f(&Slice {
                        step: Step::Phases(Self::phases(s, t)),
                        w,
                        w_adj: &w_adj,
                    })
                })
                .collect()),
            Engine::Floquet { u, u_adj } => Ok(grid
                .kick_counts()?
                .into_par_iter()
                .map(|n| {
                    f(&Slice {
                        step: Step::Kicks { u, u_adj, n },
                        w,
                        w_adj: &w_adj,
                    })
                })
                .collect()),
        }
    }

    /// `U(t) ψ` in the frame for every grid time.
    pub fn map_states<R, F>(&self, grid: &TimeGrid, psi: &CVector, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&CVector) -> R + Sync + Send,
    {
        match self {
            Engine::Spectral(s) => Ok(grid
                .times()
                .par_iter()
                .map(|&t| f(&Self::phases(s, t).component_mul(psi)))
                .collect()),
            Engine::Floquet { u, .. } => {
                let mut current = psi.clone();
                let mut at = 0u32;
                let mut out = Vec::with_capacity(grid.len());
                for n in grid.kick_counts()? {
                    while at < n {
                        current = *u * &current;
                        at += 1;
                    }
                    out.push(f(&current));
                }
                Ok(out)
            }
        }
    }
}

enum Step<'a> {
    Phases(CVector),
    Kicks { u: &'a CMatrix, u_adj: &'a CMatrix, n: u32 },
}

/// `W(t)` at one time, applied to vectors without forming the matrix.
pub(crate) struct Slice<'a> {
    step: Step<'a>,
    w: &'a CMatrix,
    w_adj: &'a CMatrix,
}

impl Slice<'_> {
    /// `U(t) x`.
    pub fn forward(&self, x: &CVector) -> CVector {
        match &self.step {
            Step::Phases(d) => d.component_mul(x),
            Step::Kicks { u, n, .. } => (0..*n).fold(x.clone(), |acc, _| *u * acc),
        }
    }

    /// `U(t)† x`.
    pub fn backward(&self, x: &CVector) -> CVector {
        match &self.step {
            Step::Phases(d) => d.conjugate().component_mul(x),
            Step::Kicks { u_adj, n, .. } => (0..*n).fold(x.clone(), |acc, _| *u_adj * acc),
        }
    }

    /// `W(t) x`.
    pub fn w(&self, x: &CVector) -> CVector {
        self.backward(&(self.w * self.forward(x)))
    }

    /// `W(t)† x`.
    pub fn w_adj(&self, x: &CVector) -> CVector {
        self.backward(&(self.w_adj * self.forward(x)))
    }
}

fn matrix_power(u: &CMatrix, mut n: u32) -> CMatrix {
    let d = u.nrows();
    let mut result = CMatrix::identity(d, d);
    let mut base = u.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `W(t) = U(t)† W(0) U(t)`; for Floquet models `t` counts kicks and must be a
/// nonnegative integer.
pub fn heisenberg_evolve(model: &ModelInstance, w0: &Operator, t: f64) -> Result<Operator> {
    if w0.space() != model.space() {
        return Err(Error::space_mismatch(w0.space(), model.space()));
    }
    match model.generator() {
        Generator::Hamiltonian(h) => {
            if t == 0.0 {
                return Ok(w0.clone());
            }
            let s = HermitianSpectrum::new(h)?;
            let framed = s.to_eigenbasis(w0.matrix());
            Ok(w0.with_matrix(s.from_eigenbasis(&Engine::evolve_spectral(&s, &framed, t))))
        }
        Generator::Floquet(u) => {
            let n = kick_count(t)?;
            if n == 0 {
                return Ok(w0.clone());
            }
            let un = matrix_power(u.matrix(), n);
            Ok(w0.with_matrix(un.adjoint() * w0.matrix() * un))
        }
    }
}
