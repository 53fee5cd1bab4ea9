//! Time-series analytics: exponential-window detection, Lyapunov-rate fits,
//! saturation-time estimates, Ehrenfest scaling and the chaos-bound check.

use std::f64::consts::{LN_10, TAU};

use serde::{Deserialize, Serialize};

use crate::classical::{tangent_lyapunov, MapState, TorusMap};
use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::models::{build_kicked_rotor, KickedRotorSpec};
use crate::scrambling::{squared_commutator, TimeGrid, TimeSeries};

/// Tunable constants behind every verdict; the defaults are what reports use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    /// Fewest samples for a fit to count as valid.
    pub min_window_points: usize,
    /// Largest RMS log-space residual for a valid fit.
    pub residual_cap: f64,
    /// Relative band around the plateau that counts as saturated.
    pub plateau_band: f64,
    /// Trailing fraction of samples averaged into the plateau.
    pub plateau_fraction: f64,
    /// Decades of growth below which a chaos-bound verdict carries a caveat.
    pub decade_span: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            min_window_points: 8,
            residual_cap: 0.1,
            plateau_band: 0.05,
            plateau_fraction: 0.2,
            decade_span: 1.0,
        }
    }
}

/// Half-open index range `[start, end)` into a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthWindow {
    pub start: usize,
    pub end: usize,
}

impl GrowthWindow {
    pub fn empty() -> Self {
        Self { start: 0, end: 0 }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Samples with `t0 ≤ t ≤ t1`.
    pub fn between(series: &TimeSeries<f64>, t0: f64, t1: f64) -> Self {
        let times = series.times();
        let start = times.partition_point(|&t| t < t0);
        let end = times.partition_point(|&t| t <= t1).max(start);
        Self { start, end }
    }
}

/// Log-linear fit `ln C ≈ intercept + rate · t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub rate: f64,
    pub intercept: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
    /// RMS residual in log space.
    pub residual: f64,
    pub valid: bool,
}

impl GrowthFit {
    /// Decades of growth covered by the fitted line.
    pub fn decades(&self) -> f64 {
        self.rate * (self.t_end - self.t_start) / LN_10
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationMethod {
    /// Enters and stays within the plateau band.
    PlateauBand,
    /// Log-interpolated crossing of a fixed fraction of the plateau.
    Crossing,
    /// Never settles; `t_sat` is the last grid time.
    Unsaturated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationEstimate {
    pub t_sat: f64,
    pub plateau: f64,
    pub method: SaturationMethod,
}

fn check_nonnegative(series: &TimeSeries<f64>) -> Result<()> {
    match series.values().iter().position(|v| !(*v >= 0.0)) {
        Some(k) => Err(Error::InvalidSeries(format!(
            "value {} at t = {} is negative or NaN",
            series.values()[k],
            series.times()[k]
        ))),
        None => Ok(()),
    }
}

impl AnalysisSettings {
    fn plateau(&self, values: &[f64]) -> f64 {
        let tail = ((values.len() as f64 * self.plateau_fraction).ceil() as usize).clamp(1, values.len());
        values[values.len() - tail..].iter().sum::<f64>() / tail as f64
    }

    /// Longest contiguous run with `floor < C < ceiling_fraction · plateau`
    /// (earliest on ties); empty when no sample qualifies.
    pub fn detect_growth_window(
        &self,
        series: &TimeSeries<f64>,
        floor: f64,
        ceiling_fraction: f64,
    ) -> Result<GrowthWindow> {
        check_nonnegative(series)?;
        if !(ceiling_fraction > 0.0 && ceiling_fraction < 1.0) {
            return Err(Error::InvalidSeries(format!(
                "ceiling fraction {ceiling_fraction} must lie in (0, 1)"
            )));
        }
        if series.is_empty() {
            return Ok(GrowthWindow::empty());
        }
        let ceiling = ceiling_fraction * self.plateau(series.values());
        let mut best = GrowthWindow::empty();
        let mut start = None;
        for (k, &v) in series.values().iter().chain([&f64::NAN]).enumerate() {
            let inside = v > floor && v < ceiling;
            match (inside, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    if k - s > best.len() {
                        best = GrowthWindow { start: s, end: k };
                    }
                    start = None;
                }
                _ => {}
            }
        }
        Ok(best)
    }

    /// Least-squares line through `(t, ln C)` on `window`.
    pub fn fit_lyapunov(&self, series: &TimeSeries<f64>, window: GrowthWindow) -> Result<GrowthFit> {
        if window.end > series.len() || window.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "growth window holds {} samples; a fit needs at least 2",
                window.len().min(series.len())
            )));
        }
        let ts = &series.times()[window.start..window.end];
        let vs = &series.values()[window.start..window.end];
        if let Some(k) = vs.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::InvalidSeries(format!(
                "nonpositive value {} at t = {} inside the fit window",
                vs[k], ts[k]
            )));
        }
        let ys: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
        let n = ts.len() as f64;
        let tm = ts.iter().sum::<f64>() / n;
        let ym = ys.iter().sum::<f64>() / n;
        let sxx: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
        let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
        let rate = sxy / sxx;
        let intercept = ym - rate * tm;
        let residual = (ts
            .iter()
            .zip(&ys)
            .map(|(t, y)| (y - intercept - rate * t).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        Ok(GrowthFit {
            rate,
            intercept,
            t_start: ts[0],
            t_end: ts[ts.len() - 1],
            points: ts.len(),
            residual,
            valid: ts.len() >= self.min_window_points && residual <= self.residual_cap,
        })
    }

    /// Detected window plus fit; when detection finds fewer than two samples,
    /// falls back to every sample above `floor` (the fit is then marked invalid).
    pub fn growth_rate(&self, series: &TimeSeries<f64>, floor: f64, ceiling_fraction: f64) -> Result<GrowthFit> {
        let window = self.detect_growth_window(series, floor, ceiling_fraction)?;
        if window.len() >= 2 {
            return self.fit_lyapunov(series, window);
        }
        let start = series.values().iter().position(|&v| v > floor).unwrap_or(series.len());
        let end = series.values()[start..]
            .iter()
            .position(|&v| v <= floor)
            .map_or(series.len(), |k| start + k);
        let mut fit = self.fit_lyapunov(series, GrowthWindow { start, end })?;
        fit.valid = false;
        Ok(fit)
    }

    /// Plateau from the trailing samples; `t_sat` is the first time after
    /// which the series stays inside the plateau band.
    pub fn estimate_saturation(&self, series: &TimeSeries<f64>) -> Result<SaturationEstimate> {
        if series.is_empty() {
            return Err(Error::InsufficientData("empty series".into()));
        }
        let values = series.values();
        let plateau = self.plateau(values);
        let band = self.plateau_band * plateau.abs();
        let outside = |v: &f64| (v - plateau).abs() > band;
        let settled = values.iter().rposition(outside).map_or(0, |k| k + 1);
        Ok(if settled == values.len() {
            SaturationEstimate {
                t_sat: series.grid().last(),
                plateau,
                method: SaturationMethod::Unsaturated,
            }
        } else {
            SaturationEstimate {
                t_sat: series.times()[settled],
                plateau,
                method: SaturationMethod::PlateauBand,
            }
        })
    }

    /// First time the series reaches `fraction · plateau`, interpolated
    /// linearly in `ln C` between samples (linearly in `C` next to zeros).
    pub fn crossing_time(&self, series: &TimeSeries<f64>, fraction: f64) -> Result<SaturationEstimate> {
        check_nonnegative(series)?;
        if series.is_empty() {
            return Err(Error::InsufficientData("empty series".into()));
        }
        let values = series.values();
        let times = series.times();
        let plateau = self.plateau(values);
        let level = fraction * plateau;
        let Some(k) = values.iter().position(|&v| v >= level) else {
            return Ok(SaturationEstimate {
                t_sat: series.grid().last(),
                plateau,
                method: SaturationMethod::Unsaturated,
            });
        };
        let t_sat = if k == 0 {
            times[0]
        } else {
            let (a, b) = (values[k - 1], values[k]);
            let frac = if a > 0.0 {
                (level / a).ln() / (b / a).ln()
            } else {
                (level - a) / (b - a)
            };
            times[k - 1] + frac * (times[k] - times[k - 1])
        };
        Ok(SaturationEstimate {
            t_sat,
            plateau,
            method: SaturationMethod::Crossing,
        })
    }

    pub fn mss_check(&self, fit: &GrowthFit, temperature: f64) -> Result<MssVerdict> {
        if !fit.valid {
            return Err(Error::InsufficientData(
                "the chaos-bound check needs a valid growth fit".into(),
            ));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidState(format!("temperature {temperature} must be > 0")));
        }
        let bound = TAU * temperature;
        let decades = fit.decades();
        Ok(MssVerdict {
            pass: fit.rate <= bound,
            rate: fit.rate,
            bound,
            ratio: fit.rate / bound,
            decades,
            caveat: decades < self.decade_span,
        })
    }
}

/// [`AnalysisSettings::detect_growth_window`] with default settings.
pub fn detect_growth_window(series: &TimeSeries<f64>, floor: f64, ceiling_fraction: f64) -> Result<GrowthWindow> {
    AnalysisSettings::default().detect_growth_window(series, floor, ceiling_fraction)
}

/// [`AnalysisSettings::fit_lyapunov`] with default settings.
pub fn fit_lyapunov(series: &TimeSeries<f64>, window: GrowthWindow) -> Result<GrowthFit> {
    AnalysisSettings::default().fit_lyapunov(series, window)
}

/// [`AnalysisSettings::estimate_saturation`] with default settings.
pub fn estimate_saturation(series: &TimeSeries<f64>) -> Result<SaturationEstimate> {
    AnalysisSettings::default().estimate_saturation(series)
}

/// [`AnalysisSettings::mss_check`] with default settings.
pub fn mss_check(fit: &GrowthFit, temperature: f64) -> Result<MssVerdict> {
    AnalysisSettings::default().mss_check(fit, temperature)
}

/// Outcome of comparing a fitted rate with `2πT` (units `ħ = k_B = 1`).
///
/// This is a report, not a theorem about the model: `caveat` is set when the
/// growth window spans too few decades for a clean separation of scales.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MssVerdict {
    pub pass: bool,
    pub rate: f64,
    pub bound: f64,
    pub ratio: f64,
    pub decades: f64,
    pub caveat: bool,
}

/// Kicked-rotor family swept over `ħ_eff` at fixed kick strength.
///
/// The momentum torus keeps a fixed span, so the basis size is the odd
/// integer nearest `momentum_span / ħ_eff`. Each point is the infinite-
/// temperature squared commutator of `W = V = cos θ`, whose saturation time
/// is the log-interpolated crossing of `saturation_fraction` of the plateau.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EhrenfestSetup {
    pub kick_strength: f64,
    #[serde(default = "EhrenfestSetup::default_span")]
    pub momentum_span: f64,
    #[serde(default = "EhrenfestSetup::default_kicks")]
    pub kicks: u32,
    #[serde(default = "EhrenfestSetup::default_fraction")]
    pub saturation_fraction: f64,
    /// Classical Lyapunov exponent below which the family counts as regular.
    #[serde(default = "EhrenfestSetup::default_chaos_threshold")]
    pub chaos_threshold: f64,
}

impl EhrenfestSetup {
    fn default_span() -> f64 {
        4.0 * TAU
    }

    fn default_kicks() -> u32 {
        12
    }

    fn default_fraction() -> f64 {
        0.5
    }

    fn default_chaos_threshold() -> f64 {
        0.1
    }

    pub fn new(kick_strength: f64) -> Self {
        Self {
            kick_strength,
            momentum_span: Self::default_span(),
            kicks: Self::default_kicks(),
            saturation_fraction: Self::default_fraction(),
            chaos_threshold: Self::default_chaos_threshold(),
        }
    }

    pub fn rotor_spec(&self, hbar: f64) -> KickedRotorSpec {
        let mut n = (self.momentum_span / hbar).round().max(3.0) as usize;
        if n.is_multiple_of(2) {
            n += 1;
        }
        KickedRotorSpec {
            kick_strength: self.kick_strength,
            effective_planck: hbar,
            basis_size: n,
        }
    }

    /// Lyapunov exponent of the classical limit, averaged over a few seeds.
    pub fn classical_lyapunov(&self) -> f64 {
        let map = TorusMap::Standard {
            kick_strength: self.kick_strength,
        };
        let seeds = [(0.5, 0.3), (1.7, 2.9), (4.1, 5.3), (2.3, 0.9)];
        seeds
            .iter()
            .map(|&(x, p)| tangent_lyapunov(&map, MapState::new(&map, x, p), 20_000))
            .sum::<f64>()
            / seeds.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EhrenfestPoint {
    pub hbar: f64,
    pub basis_size: usize,
    pub saturation: SaturationEstimate,
    /// Growth-rate fit on the detected window, when one exists.
    pub fit: Option<GrowthFit>,
    pub series: TimeSeries<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EhrenfestScaling {
    pub points: Vec<EhrenfestPoint>,
    /// Slope of `t_sat` against `ln(1/ħ_eff)`.
    pub slope: f64,
    pub intercept: f64,
    pub classical_lyapunov: f64,
    /// False for regular dynamics or when some point never grows.
    pub applicable: bool,
    pub note: String,
}

pub fn ehrenfest_scaling(setup: &EhrenfestSetup, hbars: &[f64]) -> Result<EhrenfestScaling> {
    ehrenfest_scaling_with(&AnalysisSettings::default(), setup, hbars)
}

pub fn ehrenfest_scaling_with(
    settings: &AnalysisSettings,
    setup: &EhrenfestSetup,
    hbars: &[f64],
) -> Result<EhrenfestScaling> {
    if hbars.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "Ehrenfest scaling needs at least 3 values of ħ_eff, got {}",
            hbars.len()
        )));
    }
    let xs: Vec<f64> = hbars.iter().map(|h| (1.0 / h).ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData(
            "all ħ_eff values coincide; the scaling slope is undefined".into(),
        ));
    }
    let grid = TimeGrid::kicks(setup.kicks);
    let mut points = Vec::with_capacity(hbars.len());
    for &hbar in hbars {
        let spec = setup.rotor_spec(hbar);
        let model = build_kicked_rotor(&spec)?;
        let w = model.local_operator(0, "cos")?;
        let rho = DensityMatrix::maximally_mixed(model.space());
        let series = squared_commutator(&model, &w, &w, &rho, &grid)?;
        let saturation = settings.crossing_time(&series, setup.saturation_fraction)?;
        let fit = settings.growth_rate(&series, 1e-14, 0.1).ok();
        points.push(EhrenfestPoint {
            hbar,
            basis_size: spec.basis_size,
            saturation,
            fit,
            series,
        });
    }
    let ym = points.iter().map(|p| p.saturation.t_sat).sum::<f64>() / xs.len() as f64;
    let sxy: f64 = xs
        .iter()
        .zip(&points)
        .map(|(x, p)| (x - xm) * (p.saturation.t_sat - ym))
        .sum();
    let slope = sxy / sxx;
    let classical_lyapunov = setup.classical_lyapunov();
    let (applicable, note) = if classical_lyapunov < setup.chaos_threshold {
        (
            false,
            format!(
                "classical Lyapunov exponent {classical_lyapunov:.3e} is below {}; no exponential window, scaling not applicable",
                setup.chaos_threshold
            ),
        )
    } else if points
        .iter()
        .any(|p| p.saturation.method == SaturationMethod::Unsaturated)
    {
        (false, "at least one series never reached the saturation level".into())
    } else {
        (true, "saturation time is the log-interpolated plateau crossing".into())
    };
    Ok(EhrenfestScaling {
        points,
        slope,
        intercept: ym - slope * xm,
        classical_lyapunov,
        applicable,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn series(times: Vec<f64>, f: impl Fn(f64) -> f64) -> TimeSeries<f64> {
        let values = times.iter().map(|&t| f(t)).collect();
        TimeSeries::new(TimeGrid::new(times).unwrap(), values).unwrap()
    }

    fn uniform(t1: f64, n: usize) -> Vec<f64> {
        TimeGrid::uniform(0.0, t1, n).unwrap().times().to_vec()
    }

    #[test]
    fn window_of_capped_exponential() {
        let s = series(uniform(5.0, 101), |t| (2.0 * t).exp().min(100.0));
        let w = detect_growth_window(&s, 1e-3, 0.1).unwrap();
        assert_eq!(w.start, 0);
        let last = s.values()[w.end - 1];
        assert!(last < 10.0 && s.values()[w.end] >= 10.0);
        assert!(last > 10.0 * (-0.1f64).exp());
    }

    #[test]
    fn empty_windows() {
        let flat = series(uniform(1.0, 10), |_| 3.0);
        assert!(detect_growth_window(&flat, 1e-3, 0.1).unwrap().is_empty());
        let tiny = series(uniform(1.0, 10), |t| 1e-9 * (1.0 + t));
        assert!(detect_growth_window(&tiny, 1e-3, 0.1).unwrap().is_empty());
        let neg = series(uniform(1.0, 3), |t| t - 0.5);
        assert!(detect_growth_window(&neg, 1e-3, 0.1).is_err());
        assert!(detect_growth_window(&flat, 1e-3, 1.0).is_err());
    }

    #[test]
    fn exact_exponential_fit() {
        let s = series(uniform(3.0, 31), |t| 0.5 * (2.0 * t).exp());
        let fit = fit_lyapunov(&s, GrowthWindow { start: 4, end: 20 }).unwrap();
        assert_relative_eq!(fit.rate, 2.0, epsilon = 1e-10);
        assert_relative_eq!(fit.intercept, 0.5f64.ln(), epsilon = 1e-10);
        assert!(fit.valid);
        let short = fit_lyapunov(&s, GrowthWindow { start: 0, end: 4 }).unwrap();
        assert!(!short.valid);
        assert!(fit_lyapunov(&s, GrowthWindow { start: 3, end: 4 }).is_err());
    }

    #[test]
    fn power_law_is_flagged() {
        let s = series(uniform(10.0, 101), |t| t * t);
        let fit = fit_lyapunov(&s, GrowthWindow { start: 1, end: 101 }).unwrap();
        assert!(!fit.valid);
        assert!(fit.residual > 0.1);
        let zero = series(uniform(1.0, 10), |t| t);
        assert!(fit_lyapunov(&zero, GrowthWindow { start: 0, end: 5 }).is_err());
    }

    #[test]
    fn saturation_estimates() {
        let flat = series(uniform(4.0, 9), |_| 2.0);
        let e = estimate_saturation(&flat).unwrap();
        assert_eq!(e.t_sat, 0.0);
        assert_eq!(e.method, SaturationMethod::PlateauBand);
        // tanh shoulder: within 5% once tanh(t − 3) > 0.95 − ..., i.e. near t ≈ 3 + atanh(0.9)/1 ≈ 4.47
        let ramp = series(uniform(20.0, 401), |t| 1.0 + (t - 3.0).tanh());
        let e = estimate_saturation(&ramp).unwrap();
        assert_relative_eq!(e.plateau, 2.0, epsilon = 1e-6);
        assert!((e.t_sat - 4.47).abs() < 0.1, "{}", e.t_sat);
        let growing = series(uniform(4.0, 41), |t| t.exp());
        let e = estimate_saturation(&growing).unwrap();
        assert_eq!(e.method, SaturationMethod::Unsaturated);
        assert_eq!(e.t_sat, 4.0);
    }

    #[test]
    fn crossing_interpolates_in_log_space() {
        let s = series(uniform(5.0, 51), |t| (2.0 * t).exp().min(1e3));
        let e = AnalysisSettings::default().crossing_time(&s, 0.5).unwrap();
        assert_relative_eq!(e.t_sat, 500f64.ln() / 2.0, epsilon = 1e-12);
        assert_eq!(e.method, SaturationMethod::Crossing);
    }

    #[test]
    fn mss_examples() {
        let fit = |rate, t_end| GrowthFit {
            rate,
            intercept: 0.0,
            t_start: 0.0,
            t_end,
            points: 10,
            residual: 0.0,
            valid: true,
        };
        let v = mss_check(&fit(5.0, 2.0), 1.0).unwrap();
        assert!(v.pass && !v.caveat);
        assert_relative_eq!(v.ratio, 5.0 / TAU, epsilon = 1e-15);
        let v = mss_check(&fit(7.0, 2.0), 1.0).unwrap();
        assert!(!v.pass);
        assert_relative_eq!(v.ratio, 7.0 / TAU, epsilon = 1e-15);
        // half a decade of growth
        let v = mss_check(&fit(1.0, 0.5 * LN_10), 1.0).unwrap();
        assert!(v.caveat && v.pass);
        let mut bad = fit(1.0, 1.0);
        bad.valid = false;
        assert!(mss_check(&bad, 1.0).is_err());
        assert!(mss_check(&fit(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn ehrenfest_preconditions() {
        let setup = EhrenfestSetup::new(10.0);
        assert!(ehrenfest_scaling(&setup, &[0.1, 0.1, 0.1]).is_err());
        assert!(ehrenfest_scaling(&setup, &[0.2, 0.1]).is_err());
        let s = setup.rotor_spec(0.1);
        assert_eq!(s.basis_size, 251);
    }

    #[test]
    fn regular_rotor_is_not_applicable() {
        let mut setup = EhrenfestSetup::new(0.0);
        setup.kicks = 6;
        let r = ehrenfest_scaling(&setup, &[0.8, 0.6, 0.4]).unwrap();
        assert!(!r.applicable);
        assert!(r.classical_lyapunov < 0.01);
    }
}
