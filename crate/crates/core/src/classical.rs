//! Classical companions on the 2-torus: the Arnold cat map and the Chirikov
//! standard map, tangent-map Lyapunov exponents, finite-difference
//! sensitivity, and an Ulam-type transfer (Koopman) operator.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scrambling::{TimeGrid, TimeSeries};

/// Steps between renormalizations of the accumulated tangent matrix.
pub const RENORMALIZE_EVERY: usize = 10;

/// Area-preserving map of the torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TorusMap {
    /// `(x, p) → (2x + p, x + p) mod 1`.
    Cat,
    /// `p' = p + K sin θ`, `θ' = θ + p'`, both mod 2π (kick before drift).
    Standard { kick_strength: f64 },
}

impl TorusMap {
    pub fn standard(kick_strength: f64) -> Result<Self> {
        let map = TorusMap::Standard { kick_strength };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TorusMap::Cat => Ok(()),
            TorusMap::Standard { kick_strength } if kick_strength >= 0.0 && kick_strength.is_finite() => Ok(()),
            TorusMap::Standard { kick_strength } => Err(Error::InvalidSpec(format!(
                "standard-map kick strength {kick_strength} must be finite and >= 0"
            ))),
        }
    }

    /// Side length of the fundamental domain: 1 for the cat map, 2π for the standard map.
    pub fn period(&self) -> f64 {
        match self {
            TorusMap::Cat => 1.0,
            TorusMap::Standard { .. } => TAU,
        }
    }

    /// One application of the map.
    pub fn step(&self, s: MapState) -> MapState {
        match *self {
            TorusMap::Cat => MapState::wrapped(2.0 * s.x + s.p, s.x + s.p, 1.0),
            TorusMap::Standard { kick_strength } => {
                let p = s.p + kick_strength * s.x.sin();
                MapState::wrapped(s.x + p, p, TAU)
            }
        }
    }

    /// Jacobian `∂(x', p') / ∂(x, p)` at `s`.
    pub fn jacobian(&self, s: MapState) -> Matrix2<f64> {
        match *self {
            TorusMap::Cat => Matrix2::new(2.0, 1.0, 1.0, 1.0),
            TorusMap::Standard { kick_strength } => {
                let k = kick_strength * s.x.cos();
                Matrix2::new(1.0 + k, 1.0, k, 1.0)
            }
        }
    }
}

/// Point of the fundamental domain; `x` is the angle `θ` for the standard map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapState {
    pub x: f64,
    pub p: f64,
}

impl MapState {
    /// Point reduced into the fundamental domain of `map`.
    pub fn new(map: &TorusMap, x: f64, p: f64) -> Self {
        Self::wrapped(x, p, map.period())
    }

    fn wrapped(x: f64, p: f64, period: f64) -> Self {
        Self {
            x: wrap(x, period),
            p: wrap(p, period),
        }
    }
}

fn wrap(v: f64, period: f64) -> f64 {
    let r = v.rem_euclid(period);
    // rem_euclid can round up to exactly `period`
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Difference `a − b` taken to the nearest periodic image.
fn minimal_image(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    if d > period / 2.0 {
        d - period
    } else {
        d
    }
}

pub fn iterate_map(map: &TorusMap, s: MapState, steps: usize) -> MapState {
    (0..steps).fold(s, |acc, _| map.step(acc))
}

/// `s, T(s), …, T^steps(s)`.
pub fn orbit(map: &TorusMap, s: MapState, steps: usize) -> Vec<MapState> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut current = s;
    out.push(current);
    for _ in 0..steps {
        current = map.step(current);
        out.push(current);
    }
    out
}

/// Base point plus the accumulated tangent map `DT^n`.
///
/// The matrix is stored as `jacobian · e^{log_scale}` so long runs do not
/// overflow. The determinant is accumulated from the per-step determinants
/// because the renormalized matrix is nearly singular after many steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentState {
    pub base: MapState,
    pub jacobian: Matrix2<f64>,
    pub log_scale: f64,
    pub steps: usize,
    determinant: f64,
}

impl TangentState {
    pub fn new(base: MapState) -> Self {
        Self {
            base,
            jacobian: Matrix2::identity(),
            log_scale: 0.0,
            steps: 0,
            determinant: 1.0,
        }
    }

    pub fn step(&mut self, map: &TorusMap) {
        let j = map.jacobian(self.base);
        self.determinant *= j.determinant();
        self.jacobian = j * self.jacobian;
        self.base = map.step(self.base);
        self.steps += 1;
        if self.steps.is_multiple_of(RENORMALIZE_EVERY) {
            self.renormalize();
        }
    }

    fn renormalize(&mut self) {
        let s = spectral_norm(&self.jacobian);
        if s > 0.0 {
            self.jacobian /= s;
            self.log_scale += s.ln();
        }
    }

    /// The accumulated tangent matrix itself; overflows for long chaotic runs.
    pub fn matrix(&self) -> Matrix2<f64> {
        self.jacobian * self.log_scale.exp()
    }

    /// `ln ‖DT^n‖₂`.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + spectral_norm(&self.jacobian).ln()
    }

    /// `det DT^n`, equal to 1 for area-preserving maps.
    pub fn determinant(&self) -> f64 {
        self.determinant
    }
}

fn spectral_norm(m: &Matrix2<f64>) -> f64 {
    // largest singular value of a 2×2 matrix in closed form
    let f = m.norm_squared();
    let d = m.determinant();
    ((f + (f * f - 4.0 * d * d).max(0.0).sqrt()) / 2.0).sqrt()
}

pub fn tangent_evolve(map: &TorusMap, s0: MapState, steps: usize) -> TangentState {
    let mut t = TangentState::new(s0);
    for _ in 0..steps {
        t.step(map);
    }
    t
}

/// Largest Lyapunov exponent `ln ‖DT^n(s0)‖₂ / n`; meaningful for `n ≳ 100`.
pub fn tangent_lyapunov(map: &TorusMap, s0: MapState, steps: usize) -> f64 {
    if steps == 0 {
        return 0.0;
    }
    tangent_evolve(map, s0, steps).log_norm() / steps as f64
}

/// Central-difference estimate of `∂x_n / ∂x_0`.
pub fn sensitivity_fd(map: &TorusMap, s0: MapState, steps: usize, delta: f64) -> f64 {
    let period = map.period();
    let plus = iterate_map(map, MapState::new(map, s0.x + delta, s0.p), steps);
    let minus = iterate_map(map, MapState::new(map, s0.x - delta, s0.p), steps);
    minimal_image(plus.x, minus.x, period) / (2.0 * delta)
}

/// First step at which the finite-difference sensitivity departs from the
/// tangent-matrix entry by more than `rel_tol`, i.e. where folding of the
/// torus takes over from linear stretching.
pub fn sensitivity_breakdown(
    map: &TorusMap,
    s0: MapState,
    delta: f64,
    max_steps: usize,
    rel_tol: f64,
) -> Option<usize> {
    let mut tangent = TangentState::new(s0);
    for n in 1..=max_steps {
        tangent.step(map);
        let exact = tangent.matrix()[(0, 0)];
        let fd = sensitivity_fd(map, s0, n, delta);
        if (fd - exact).abs() > rel_tol * exact.abs().max(1.0) {
            return Some(n);
        }
    }
    None
}

/// Ulam transfer matrix of a torus map on an `n × n` grid of cells.
///
/// Each cell is represented by its lattice corner `(i, j) · period / n` and
/// sent to the cell of the lattice point nearest its image. For the cat map
/// this is the exact integer action `(i, j) → (2i + j, i + j) mod n`, so the
/// matrix is a permutation for every `n`. The matrix is stored as one target
/// per column; cell `(i, j)` has index `i·n + j` (`i` along `x`).
#[derive(Clone, Debug, PartialEq)]
pub struct KoopmanGrid {
    map: TorusMap,
    resolution: usize,
    targets: Vec<usize>,
}

impl KoopmanGrid {
    pub fn map(&self) -> &TorusMap {
        &self.map
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn num_cells(&self) -> usize {
        self.targets.len()
    }

    /// Row of the single nonzero entry in column `cell`.
    pub fn target(&self, cell: usize) -> usize {
        self.targets[cell]
    }

    /// Representative phase-space point of a cell.
    pub fn cell_point(&self, cell: usize) -> MapState {
        let h = self.map.period() / self.resolution as f64;
        MapState {
            x: (cell / self.resolution) as f64 * h,
            p: (cell % self.resolution) as f64 * h,
        }
    }

    /// Samples `f(x, p)` at every cell representative.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.num_cells())
            .map(|c| {
                let s = self.cell_point(c);
                f(s.x, s.p)
            })
            .collect()
    }

    /// Dense `n² × n²` column-stochastic matrix acting on cell densities.
    pub fn dense(&self) -> DMatrix<f64> {
        let d = self.num_cells();
        let mut m = DMatrix::zeros(d, d);
        for (col, &row) in self.targets.iter().enumerate() {
            m[(row, col)] = 1.0;
        }
        m
    }

    /// Pushes a density forward one step, `ρ ↦ Pρ`.
    pub fn push_density(&self, rho: &[f64]) -> Result<Vec<f64>> {
        self.check_len(rho.len())?;
        let mut out = vec![0.0; rho.len()];
        for (col, &row) in self.targets.iter().enumerate() {
            out[row] += rho[col];
        }
        Ok(out)
    }

    /// Pulls an observable back one step, `f ↦ f ∘ T = Pᵀ f`.
    pub fn pull_observable(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        Ok(self.targets.iter().map(|&row| f[row]).collect())
    }

    /// True when every cell has exactly one preimage.
    pub fn is_permutation(&self) -> bool {
        let mut hit = vec![false; self.targets.len()];
        for &t in &self.targets {
            if std::mem::replace(&mut hit[t], true) {
                return false;
            }
        }
        true
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.num_cells() {
            return Err(Error::DimensionMismatch {
                expected: self.num_cells(),
                found: len,
            });
        }
        Ok(())
    }
}

pub fn koopman_matrix(map: &TorusMap, resolution: usize) -> Result<KoopmanGrid> {
    map.validate()?;
    if resolution < 8 {
        return Err(Error::InvalidGrid(format!("Koopman resolution {resolution} < 8")));
    }
    let n = resolution;
    let targets = match *map {
        TorusMap::Cat => (0..n * n)
            .map(|c| {
                let (i, j) = (c / n, c % n);
                ((2 * i + j) % n) * n + (i + j) % n
            })
            .collect(),
        TorusMap::Standard { .. } => {
            let h = TAU / n as f64;
            (0..n * n)
                .map(|c| {
                    let s = map.step(MapState {
                        x: (c / n) as f64 * h,
                        p: (c % n) as f64 * h,
                    });
                    let i = (s.x / h).round() as usize % n;
                    let j = (s.p / h).round() as usize % n;
                    i * n + j
                })
                .collect()
        }
    };
    Ok(KoopmanGrid {
        map: *map,
        resolution,
        targets,
    })
}

/// Centered correlation `⟨f∘T^k, g⟩ − ⟨f⟩⟨g⟩` under the uniform cell measure,
/// for `k = 0..=steps`, obtained by repeated application of the transfer operator.
pub fn koopman_correlation(grid: &KoopmanGrid, f: &[f64], g: &[f64], steps: usize) -> Result<TimeSeries<f64>> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    let cells = f.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / cells;
    let offset = mean(f) * mean(g);
    let mut current = f.to_vec();
    let mut values = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k > 0 {
            current = grid.pull_observable(&current)?;
        }
        let inner = current.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / cells;
        values.push(inner - offset);
    }
    TimeSeries::new(TimeGrid::kicks(steps as u32), values)
}
