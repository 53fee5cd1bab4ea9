//! Quantum scrambling diagnostics: Heisenberg evolution, 2-point and
//! out-of-time-ordered correlators, squared commutators, operator growth,
//! entanglement entropy and recurrence fidelity.

mod correlators;
mod engine;
mod entanglement;
mod spreading;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::C64;

pub use correlators::{otoc_f, squared_commutator, squared_commutator_validated, two_point, CommutatorValidation};
pub use engine::heisenberg_evolve;
pub use entanglement::{common_period, entanglement_entropy, entanglement_growth, recurrence_fidelity};
pub use spreading::{bch_series, pauli_decompose, support_profile, PauliDecomposition, MAX_PAULI_SITES};

/// Strictly increasing sample times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "times must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { times })
    }

    /// `points` evenly spaced times from `start` to `end` inclusive.
    pub fn uniform(start: f64, end: f64, points: usize) -> Result<Self> {
        match points {
            0 => Err(Error::InvalidGrid("zero points".into())),
            1 => Self::new(vec![start]),
            _ => {
                let dt = (end - start) / (points - 1) as f64;
                Self::new((0..points).map(|k| start + dt * k as f64).collect())
            }
        }
    }

    /// Kick counts `0, 1, …, last`.
    pub fn kicks(last: u32) -> Self {
        Self {
            times: (0..=last).map(f64::from).collect(),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.times[0]
    }

    pub fn last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Integer kick counts, failing on the first fractional or negative time.
    pub fn kick_counts(&self) -> Result<Vec<u32>> {
        self.times.iter().map(|&t| kick_count(t)).collect()
    }
}

pub(crate) fn kick_count(t: f64) -> Result<u32> {
    if t < 0.0 || t.fract() != 0.0 || t > f64::from(u32::MAX) {
        return Err(Error::NonIntegerTime { t });
    }
    Ok(t as u32)
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.times
    }
}

/// Values sampled on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries<T = f64> {
    grid: TimeGrid,
    values: Vec<T>,
}

impl<T> TimeSeries<T> {
    pub fn new(grid: TimeGrid, values: Vec<T>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} times but {} values",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.grid.times().iter().copied().zip(&self.values)
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> TimeSeries<U> {
        TimeSeries {
            grid: self.grid.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl TimeSeries<C64> {
    pub fn real_part(&self) -> TimeSeries<f64> {
        self.map(|z| z.re)
    }

    pub fn imag_part(&self) -> TimeSeries<f64> {
        self.map(|z| z.im)
    }
}

/// Per-time, per-site support weights of an evolving operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SpreadingProfile {
    grid: TimeGrid,
    weights: Vec<Vec<f64>>,
}

impl SpreadingProfile {
    pub fn new(grid: TimeGrid, weights: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() != weights.len() {
            return Err(Error::InvalidSeries(format!(
                "{} times but {} weight rows",
                grid.len(),
                weights.len()
            )));
        }
        let sites = weights.first().map_or(0, Vec::len);
        if weights.iter().any(|row| row.len() != sites) {
            return Err(Error::InvalidSeries("ragged weight rows".into()));
        }
        if weights.iter().flatten().any(|&w| !(-1e-12..=1.0 + 1e-12).contains(&w)) {
            return Err(Error::InvalidSeries("weights outside [0, 1]".into()));
        }
        Ok(Self { grid, weights })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn num_sites(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Weight history of one site.
    pub fn site_series(&self, site: usize) -> TimeSeries<f64> {
        TimeSeries {
            grid: self.grid.clone(),
            values: self.weights.iter().map(|row| row[site]).collect(),
        }
    }

    /// First grid time at which `site`'s weight exceeds `threshold`.
    pub fn arrival_time(&self, site: usize, threshold: f64) -> Option<f64> {
        self.grid
            .times()
            .iter()
            .zip(&self.weights)
            .find(|(_, row)| row[site] > threshold)
            .map(|(&t, _)| t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec![1.0, 0.5]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
        let g = TimeGrid::uniform(0.0, 1.0, 5).unwrap();
        assert_eq!(g.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(g.kick_counts().is_err());
        assert_eq!(TimeGrid::kicks(3).kick_counts().unwrap(), vec![0, 1, 2, 3]);
        assert!(matches!(
            TimeGrid::new(vec![-1.0, 0.0]).unwrap().kick_counts(),
            Err(Error::NonIntegerTime { .. })
        ));
    }

    #[test]
    fn series_length_must_match() {
        let g = TimeGrid::kicks(2);
        assert!(TimeSeries::new(g.clone(), vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new(g, vec![1.0, 2.0, 3.0]).is_ok());
    }

    #[test]
    fn profile_arrival() {
        let g = TimeGrid::kicks(2);
        let p = SpreadingProfile::new(g, vec![vec![1.0, 0.0], vec![1.0, 0.02], vec![1.0, 0.3]]).unwrap();
        assert_eq!(p.arrival_time(1, 0.05), Some(2.0));
        assert_eq!(p.arrival_time(1, 0.5), None);
        assert!(SpreadingProfile::new(TimeGrid::kicks(0), vec![vec![1.5]]).is_err());
    }
}
