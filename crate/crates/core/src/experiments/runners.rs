use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{
    build_model, check_kicks, EnsembleConfig, OperatorRef, OperatorsConfig, PresetState, PureConfig, RunConfig,
};
use super::output::{finite, CsvTable, ExperimentReport};
use super::Ctx;
use crate::analysis::{ehrenfest_scaling_with, EhrenfestSetup, GrowthFit, GrowthWindow, SaturationMethod};
use crate::classical::{
    koopman_correlation, koopman_matrix, orbit, sensitivity_breakdown, sensitivity_fd, tangent_evolve,
    tangent_lyapunov, MapState, TorusMap,
};
use crate::error::{Error, Result};
use crate::hilbert::{pauli, HermitianSpectrum, C64};
use crate::models::{Boundary, InvertedOscillatorSpec, KickedRotorSpec, ModelInstance, ModelSpec, SpinChainSpec};
use crate::scrambling::{
    common_period, entanglement_growth, heisenberg_evolve, otoc_f, recurrence_fidelity, squared_commutator,
    squared_commutator_validated, support_profile, two_point, TimeGrid, TimeSeries,
};

/// Dimensions a run will allocate, reported by `validate` before any work.
pub(crate) type Dims = Vec<(String, usize)>;

fn time_unit(spec: &ModelSpec) -> &'static str {
    match spec {
        ModelSpec::KickedRotor(_) => "kicks",
        ModelSpec::InvertedOscillator(_) => "1/lambda",
        _ => "1/J",
    }
}

fn model_dims(spec: &ModelSpec) -> Result<Dims> {
    Ok(vec![("model".into(), super::config::model_dimension(spec)?)])
}

fn grid_or(cfg: &RunConfig, spec: Option<&ModelSpec>, default: impl FnOnce() -> Result<TimeGrid>) -> Result<TimeGrid> {
    match (&cfg.grid, spec) {
        (Some(g), Some(s)) => g.build_for(s),
        (Some(g), None) => g.build(),
        (None, _) => default(),
    }
}

/// Fit, saturation and chaos-bound analysis of one `C(t)` series, as configured.
fn analyze(ctx: &Ctx, report: &mut ExperimentReport, series: &TimeSeries<f64>, temperature: Option<f64>) {
    let a = &ctx.cfg.analysis;
    let settings = a.settings();
    if a.fit {
        let fit = match a.fit_window {
            Some([t0, t1]) => settings.fit_lyapunov(series, GrowthWindow::between(series, t0, t1)),
            None => settings.growth_rate(series, a.floor, a.ceiling_fraction),
        };
        match fit {
            Ok(f) => report.growth_fit = Some(f),
            Err(e) => report.note(format!("no growth fit: {e}")),
        }
    }
    if a.saturation {
        match settings.estimate_saturation(series) {
            Ok(s) => report.saturation = Some(s),
            Err(e) => report.note(format!("no saturation estimate: {e}")),
        }
    }
    if a.mss {
        match (report.growth_fit, a.temperature.or(temperature)) {
            (Some(fit), Some(t)) => match settings.mss_check(&fit, t) {
                Ok(v) => report.mss = Some(v),
                Err(e) => report.note(format!("chaos-bound check skipped: {e}")),
            },
            (None, _) => report.note("chaos-bound check skipped: no growth fit"),
            (_, None) => report.note("chaos-bound check skipped: no temperature (set analysis.temperature)"),
        }
    }
}

// ---------------------------------------------------------------- single qubit

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SingleQubitParams {
    omega: f64,
    tolerance: f64,
}

impl Default for SingleQubitParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            tolerance: 1e-8,
        }
    }
}

fn single_qubit_grid(cfg: &RunConfig) -> Result<TimeGrid> {
    grid_or(cfg, None, || TimeGrid::uniform(0.0, 10.0, 1001))
}

pub(crate) fn plan_single_qubit(cfg: &RunConfig) -> Result<Dims> {
    let p: SingleQubitParams = cfg.params()?;
    if !p.omega.is_finite() {
        return Err(Error::Config("params.omega must be finite".into()));
    }
    single_qubit_grid(cfg)?;
    Ok(vec![("qubit".into(), 2)])
}

pub(crate) fn run_single_qubit(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let p: SingleQubitParams = cfg.params()?;
    let grid = single_qubit_grid(cfg)?;
    let h = pauli::x().scale(C64::new(p.omega / 2.0, 0.0));
    let model = ModelInstance::from_hamiltonian("single_qubit", h)?;
    let z = pauli::z();
    let state = cfg.ensemble_or_default().build(&model, ctx.seed)?;
    let v = squared_commutator_validated(&model, &z, &z, state.as_ref(), &grid)?;

    let exact: Vec<f64> = grid.times().iter().map(|t| 4.0 * (p.omega * t).sin().powi(2)).collect();
    let err: Vec<f64> = v
        .positive_form
        .values()
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max_err = err.iter().copied().fold(0.0, f64::max);

    let mut report = ctx.report();
    ctx.out.table(
        &mut report,
        "c_of_t.csv",
        &CsvTable::new(grid.times(), "1/omega")
            .real("C", "1", v.positive_form.values())
            .real("C_exact", "1", &exact)
            .real("abs_error", "1", &err),
    )?;
    ctx.out.table(
        &mut report,
        "otoc.csv",
        &CsvTable::new(grid.times(), "1/omega").complex("F", "1", v.otoc.values()),
    )?;

    // W(t) = cos(ωt) σ_z + sin(ωt) σ_y
    let t = 0.7;
    let wt = heisenberg_evolve(&model, &z, t)?;
    let expected = z
        .scale(C64::new((p.omega * t).cos(), 0.0))
        .add(&pauli::y().scale(C64::new((p.omega * t).sin(), 0.0)))?;
    let sign_dev = wt.sub(&expected)?.max_norm();

    report.metric("max_abs_error", max_err);
    report.metric("dual_path_max_deviation", v.max_deviation);
    report.metric("heisenberg_sign_deviation", sign_dev);
    report.hard_check("closed_form_max_abs_error", max_err < p.tolerance, max_err, p.tolerance);
    report.hard_check("heisenberg_sign_deviation", sign_dev < 1e-12, sign_dev, 1e-12);
    analyze(ctx, &mut report, &v.positive_form, None);
    Ok(report)
}

// ---------------------------------------------------------------- chain OTOC

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ChainOtocParams {
    validate: bool,
}

impl Default for ChainOtocParams {
    fn default() -> Self {
        Self { validate: true }
    }
}

fn plan_model_grid(cfg: &RunConfig) -> Result<(ModelSpec, TimeGrid)> {
    let spec = cfg.require_model()?.clone();
    let grid = cfg.require_grid()?.build_for(&spec)?;
    Ok((spec, grid))
}

pub(crate) fn plan_chain_otoc(cfg: &RunConfig) -> Result<Dims> {
    let _: ChainOtocParams = cfg.params()?;
    let (spec, _) = plan_model_grid(cfg)?;
    cfg.require_operators()?.require_v()?;
    model_dims(&spec)
}

pub(crate) fn run_chain_otoc(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let p: ChainOtocParams = cfg.params()?;
    let (spec, grid) = plan_model_grid(cfg)?;
    let model = build_model(&spec, ctx.opts.memory_cap)?;
    let ops = cfg.require_operators()?;
    let w = ops.w.build(&model)?;
    let v = ops.require_v()?.build(&model)?;
    let ensemble = cfg.ensemble_or_default();
    let state = ensemble.build(&model, ctx.seed)?;
    let unit = time_unit(&spec);

    let mut report = ctx.report();
    let (c, f) = if p.validate {
        let val = squared_commutator_validated(&model, &w, &v, state.as_ref(), &grid)?;
        report.metric("dual_path_max_deviation", val.max_deviation);
        ctx.out.table(
            &mut report,
            "c_of_t.csv",
            &CsvTable::new(grid.times(), unit)
                .real("C", "1", val.positive_form.values())
                .complex("C_hermitian", "1", val.hermitian_form.values())
                .complex("C_four_term", "1", val.four_term.values())
                .real("C_otoc_identity", "1", val.otoc_identity.values()),
        )?;
        (val.positive_form, val.otoc)
    } else {
        let c = squared_commutator(&model, &w, &v, state.as_ref(), &grid)?;
        ctx.out.table(
            &mut report,
            "c_of_t.csv",
            &CsvTable::new(grid.times(), unit).real("C", "1", c.values()),
        )?;
        (c, otoc_f(&model, &w, &v, state.as_ref(), &grid)?)
    };
    ctx.out.table(
        &mut report,
        "otoc.csv",
        &CsvTable::new(grid.times(), unit).complex("F", "1", f.values()),
    )?;
    let g = two_point(&model, &w, state.as_ref(), &grid)?;
    ctx.out.table(
        &mut report,
        "two_point.csv",
        &CsvTable::new(grid.times(), unit).complex("G", "1", g.values()),
    )?;
    analyze(ctx, &mut report, &c, ensemble.temperature());
    Ok(report)
}

// ---------------------------------------------------------------- spreading

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SpreadingParams {
    threshold: f64,
}

impl Default for SpreadingParams {
    fn default() -> Self {
        Self { threshold: 0.05 }
    }
}

pub(crate) fn plan_spreading(cfg: &RunConfig) -> Result<Dims> {
    let _: SpreadingParams = cfg.params()?;
    let (spec, _) = plan_model_grid(cfg)?;
    cfg.require_operators()?;
    model_dims(&spec)
}

pub(crate) fn run_spreading(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let p: SpreadingParams = cfg.params()?;
    let (spec, grid) = plan_model_grid(cfg)?;
    let model = build_model(&spec, ctx.opts.memory_cap)?;
    let w = cfg.require_operators()?.w.build(&model)?;
    let profile = support_profile(&model, &w, &grid)?;

    let mut report = ctx.report();
    let mut table = CsvTable::new(grid.times(), time_unit(&spec));
    for site in 0..profile.num_sites() {
        table = table.real(&format!("w_site{site}"), "1", profile.site_series(site).values());
    }
    ctx.out.table(&mut report, "spreading.csv", &table)?;

    let arrivals: Vec<Option<f64>> = (0..profile.num_sites())
        .map(|s| profile.arrival_time(s, p.threshold))
        .collect();
    let origin = cfg.require_operators()?.w.site;
    // sites to the right of the operator, in order of distance
    let ordered: Vec<Option<f64>> = arrivals[origin + 1..].to_vec();
    let monotone = ordered.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => b > a,
        (Some(_), None) => true,
        _ => false,
    });
    report.metric("arrival_threshold", p.threshold);
    report.metric("arrival_times", &arrivals);
    report.check(
        "light_cone_monotone",
        monotone,
        ordered.iter().filter(|a| a.is_some()).count() as f64,
        ordered.len() as f64,
    );
    Ok(report)
}

// ---------------------------------------------------------------- entropy vs OTOC

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EntropyParams {
    initial: PureConfig,
    cut: Option<Vec<usize>>,
}

impl Default for EntropyParams {
    fn default() -> Self {
        Self {
            initial: PureConfig::new(PresetState::Neel),
            cut: None,
        }
    }
}

fn half_cut(model: &ModelInstance) -> Vec<usize> {
    (0..model.space().num_sites() / 2).collect()
}

pub(crate) fn plan_entropy(cfg: &RunConfig) -> Result<Dims> {
    let _: EntropyParams = cfg.params()?;
    let (spec, _) = plan_model_grid(cfg)?;
    cfg.require_operators()?.require_v()?;
    model_dims(&spec)
}

pub(crate) fn run_entropy(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let p: EntropyParams = cfg.params()?;
    let (spec, grid) = plan_model_grid(cfg)?;
    let model = build_model(&spec, ctx.opts.memory_cap)?;
    let ops = cfg.require_operators()?;
    let w = ops.w.build(&model)?;
    let v = ops.require_v()?.build(&model)?;
    let ensemble = cfg.ensemble_or_default();
    let state = ensemble.build(&model, ctx.seed)?;
    let psi = p.initial.build(&model, ctx.seed)?;
    let cut = p.cut.clone().unwrap_or_else(|| half_cut(&model));
    let unit = time_unit(&spec);

    let c = squared_commutator(&model, &w, &v, state.as_ref(), &grid)?;
    let s = entanglement_growth(&model, &psi, &cut, &grid)?;
    let mut report = ctx.report();
    ctx.out.table(
        &mut report,
        "c_of_t.csv",
        &CsvTable::new(grid.times(), unit).real("C", "1", c.values()),
    )?;
    ctx.out.table(
        &mut report,
        "entropy.csv",
        &CsvTable::new(grid.times(), unit).real("S", "nats", s.values()),
    )?;

    let dims: usize = cut.iter().map(|&k| model.space().site_dims()[k]).product();
    let rest = model.space().total_dim() / dims;
    let (da, db) = (dims.min(rest) as f64, dims.max(rest) as f64);
    let settings = cfg.analysis.settings();
    report.metric("cut", &cut);
    report.metric("entropy_max", da.ln());
    report.metric("entropy_page", da.ln() - da / (2.0 * db));
    report.metric("entropy_final", s.values()[s.len() - 1]);
    report.metric("entropy_saturation", settings.estimate_saturation(&s)?);
    analyze(ctx, &mut report, &c, ensemble.temperature());
    Ok(report)
}

// ---------------------------------------------------------------- integrable vs chaotic

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ContrastParams {
    length: usize,
    probe_time: f64,
    conserved_tolerance: f64,
    probe_fraction: f64,
    entropy_horizon: f64,
    entropy_fraction: f64,
    initial: PureConfig,
}

impl Default for ContrastParams {
    fn default() -> Self {
        Self {
            length: 8,
            probe_time: 3.0,
            conserved_tolerance: 1e-10,
            probe_fraction: 0.1,
            entropy_horizon: 10.0,
            entropy_fraction: 0.8,
            initial: PureConfig::new(PresetState::Neel),
        }
    }
}

fn contrast_specs(p: &ContrastParams) -> (ModelSpec, ModelSpec) {
    (
        ModelSpec::SpinChain(SpinChainSpec::integrable(p.length)),
        ModelSpec::SpinChain(SpinChainSpec::chaotic(p.length)),
    )
}

pub(crate) fn plan_contrast(cfg: &RunConfig) -> Result<Dims> {
    let p: ContrastParams = cfg.params()?;
    grid_or(cfg, None, || TimeGrid::uniform(0.0, 10.0, 101))?;
    let (a, b) = contrast_specs(&p);
    Ok(vec![
        ("integrable".into(), super::config::model_dimension(&a)?),
        ("chaotic".into(), super::config::model_dimension(&b)?),
    ])
}

pub(crate) fn run_contrast(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let p: ContrastParams = cfg.params()?;
    let grid = grid_or(cfg, None, || TimeGrid::uniform(0.0, 10.0, 101))?;
    let (int_spec, chaos_spec) = contrast_specs(&p);
    let mut c = Vec::new();
    let mut s = Vec::new();
    for spec in [&int_spec, &chaos_spec] {
        let model = build_model(spec, ctx.opts.memory_cap)?;
        let flip = model.spin_flip()?;
        let rho = EnsembleConfig::InfiniteTemperature.build(&model, ctx.seed)?;
        c.push(squared_commutator(&model, &flip, &flip, rho.as_ref(), &grid)?);
        let psi = p.initial.build(&model, ctx.seed)?;
        s.push(entanglement_growth(&model, &psi, &half_cut(&model), &grid)?);
    }
    let mut report = ctx.report();
    ctx.out.table(
        &mut report,
        "c_of_t.csv",
        &CsvTable::new(grid.times(), "1/J")
            .real("C_integrable", "1", c[0].values())
            .real("C_chaotic", "1", c[1].values()),
    )?;
    ctx.out.table(
        &mut report,
        "entropy.csv",
        &CsvTable::new(grid.times(), "1/J")
            .real("S_integrable", "nats", s[0].values())
            .real("S_chaotic", "nats", s[1].values()),
    )?;

    let settings = cfg.analysis.settings();
    let int_max = c[0].values().iter().copied().fold(0.0, f64::max);
    let probe = grid
        .times()
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - p.probe_time).abs().total_cmp(&(b.1 - p.probe_time).abs()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let plateau = settings.estimate_saturation(&c[1])?.plateau;
    let probe_ratio = c[1].values()[probe] / plateau;
    let s_max = s[1]
        .iter()
        .filter(|(t, _)| *t <= p.entropy_horizon)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let s_threshold = p.entropy_fraction * 0.5 * (p.length / 2) as f64 * 2f64.ln();

    report.metric("integrable_max_c", int_max);
    report.metric("chaotic_probe_time", grid.times()[probe]);
    report.metric("chaotic_plateau", plateau);
    report.metric("chaotic_probe_over_plateau", probe_ratio);
    report.metric("chaotic_entropy_max", s_max);
    report.metric(
        "integrable_entropy_max",
        s[0].values().iter().copied().fold(0.0, f64::max),
    );
    report.check(
        "integrable_conserved",
        int_max < p.conserved_tolerance,
        int_max,
        p.conserved_tolerance,
    );
    report.check(
        "chaotic_probe_over_plateau",
        probe_ratio > p.probe_fraction,
        probe_ratio,
        p.probe_fraction,
    );
    report.check("chaotic_entropy_growth", s_max > s_threshold, s_max, s_threshold);
    report.note("W = V = global spin flip, conserved by the integrable chain; infinite temperature");
    report.note("entropy: quench from params.initial (default Néel), cut = first half of the chain");
    Ok(report)
}

// ---------------------------------------------------------------- inverted oscillator

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OscillatorParams {
    convergence_factor: usize,
    convergence_tol: f64,
    fit_start: f64,
    rate_tolerance: f64,
    drift_tolerance: f64,
    temperatures: Vec<f64>,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self {
            convergence_factor: 2,
            convergence_tol: 1e-3,
            fit_start: 0.0,
            rate_tolerance: 0.1,
            drift_tolerance: 0.02,
            temperatures: vec![4.0 / TAU, 1.0 / TAU, 1.0],
        }
    }
}

fn oscillator_spec(cfg: &RunConfig) -> Result<InvertedOscillatorSpec> {
    match cfg.model.clone() {
        Some(ModelSpec::InvertedOscillator(s)) => Ok(s),
        None => Ok(InvertedOscillatorSpec {
            mass: 1.0,
            instability_rate: 1.0,
            truncation: 128,
            regular: false,
        }),
        Some(_) => Err(Error::Config("model.family must be inverted_oscillator".into())),
    }
}

fn oscillator_operators(cfg: &RunConfig) -> OperatorsConfig {
    cfg.operators.clone().unwrap_or(OperatorsConfig {
        w: OperatorRef::new("u", 0),
        v: Some(OperatorRef::new("x", 0)),
    })
}

fn oscillator_ensemble(cfg: &RunConfig) -> EnsembleConfig {
    cfg.ensemble
        .clone()
        .unwrap_or(EnsembleConfig::Pure(PureConfig::new(PresetState::Basis)))
}

fn oscillator_grid(cfg: &RunConfig) -> Result<TimeGrid> {
    grid_or(cfg, None, || TimeGrid::uniform(0.0, 3.0, 61))
}

pub(crate) fn plan_oscillator(cfg: &RunConfig) -> Result<Dims> {
    let p: OscillatorParams = cfg.params()?;
    let spec = oscillator_spec(cfg)?;
    spec.validate()?;
    oscillator_grid(cfg)?;
    oscillator_operators(cfg).require_v()?;
    if p.convergence_factor < 2 {
        return Err(Error::Config("params.convergence_factor must be >= 2".into()));
    }
    Ok(vec![
        ("truncation".into(), spec.truncation),
        ("convergence".into(), spec.truncation * p.convergence_factor),
    ])
}

struct OscillatorRun {
    grid: TimeGrid,
    coarse: TimeSeries<f64>,
    fine: TimeSeries<f64>,
    exact: Option<Vec<f64>>,
    converged_until: f64,
    fit: GrowthFit,
    fine_fit: GrowthFit,
    drift: f64,
    spec: InvertedOscillatorSpec,
    fine_truncation: usize,
}

fn oscillator_run(ctx: &Ctx, p: &OscillatorParams) -> Result<OscillatorRun> {
    let cfg = ctx.cfg;
    let spec = oscillator_spec(cfg)?;
    let mut fine_spec = spec.clone();
    fine_spec.truncation *= p.convergence_factor;
    let grid = oscillator_grid(cfg)?;
    let ops = oscillator_operators(cfg);
    let ensemble = oscillator_ensemble(cfg);
    let mut series = Vec::new();
    for s in [&spec, &fine_spec] {
        let model = build_model(&ModelSpec::InvertedOscillator(s.clone()), ctx.opts.memory_cap)?;
        let w = ops.w.build(&model)?;
        let v = ops.require_v()?.build(&model)?;
        let state = ensemble.build(&model, ctx.seed)?;
        series.push(squared_commutator(&model, &w, &v, state.as_ref(), &grid)?);
    }
    let fine = series.pop().expect("two truncations");
    let coarse = series.pop().expect("two truncations");

    // longest prefix on which the two truncations agree
    let converged = coarse
        .values()
        .iter()
        .zip(fine.values())
        .take_while(|(a, b)| (*a - *b).abs() <= p.convergence_tol * b.abs().max(1e-300))
        .count();
    if converged < 2 {
        return Err(Error::InsufficientData(
            "the truncations disagree from the start; raise model.truncation".into(),
        ));
    }
    let converged_until = grid.times()[converged - 1];
    let settings = cfg.analysis.settings();
    let window = match cfg.analysis.fit_window {
        Some([t0, t1]) => GrowthWindow::between(&coarse, t0, t1),
        None => GrowthWindow::between(&coarse, p.fit_start, converged_until),
    };
    let fit = settings.fit_lyapunov(&coarse, window)?;
    let fine_fit = settings.fit_lyapunov(&fine, window)?;
    let drift = (fit.rate - fine_fit.rate).abs() / fine_fit.rate.abs();
    let standard_ops = ops.w.label == "u" && ops.v.as_ref().is_some_and(|v| v.label == "x");
    let exact = (standard_ops && !spec.regular).then(|| {
        let (m, lam) = (spec.mass, spec.instability_rate);
        grid.times()
            .iter()
            .map(|t| (2.0 * lam * t).exp() / (2.0 * m * m * lam * lam))
            .collect()
    });
    Ok(OscillatorRun {
        grid,
        coarse,
        fine,
        exact,
        converged_until,
        fit,
        fine_fit,
        drift,
        fine_truncation: fine_spec.truncation,
        spec,
    })
}

fn oscillator_table(run: &OscillatorRun) -> CsvTable {
    let mut t = CsvTable::new(run.grid.times(), "1/lambda")
        .real(&format!("C_N{}", run.spec.truncation), "1", run.coarse.values())
        .real(&format!("C_N{}", run.fine_truncation), "1", run.fine.values());
    if let Some(exact) = &run.exact {
        t = t.real("C_exact", "1", exact);
    }
    t
}

fn oscillator_metrics(report: &mut ExperimentReport, run: &OscillatorRun) {
    report.growth_fit = Some(run.fit);
    report.metric("converged_until", run.converged_until);
    report.metric("fine_truncation_fit", run.fine_fit);
    report.metric("rate_drift", run.drift);
    report.metric("expected_rate", 2.0 * run.spec.instability_rate);
    report.provenance.truncation_drift = Some(run.drift);
}

pub(crate) fn run_oscillator(ctx: &Ctx) -> Result<ExperimentReport> {
    let p: OscillatorParams = ctx.cfg.params()?;
    let run = oscillator_run(ctx, &p)?;
    let mut report = ctx.report();
    ctx.out.table(&mut report, "c_of_t.csv", &oscillator_table(&run))?;
    oscillator_metrics(&mut report, &run);
    let expected = 2.0 * run.spec.instability_rate;
    let rel = (run.fit.rate - expected).abs() / expected;
    report.check("rate_near_2_lambda", rel < p.rate_tolerance, rel, p.rate_tolerance);
    report.check(
        "truncation_drift",
        run.drift < p.drift_tolerance,
        run.drift,
        p.drift_tolerance,
    );
    let a = &ctx.cfg.analysis;
    if a.saturation {
        report.saturation = Some(a.settings().estimate_saturation(&run.coarse)?);
    }
    if a.mss {
        match a.temperature {
            Some(t) => report.mss = Some(a.settings().mss_check(&run.fit, t)?),
            None => report.note("chaos-bound check skipped: set analysis.temperature"),
        }
    }
    report.note("fit window: samples where the N and convergence truncations agree");
    Ok(report)
}

pub(crate) fn run_mss(ctx: &Ctx) -> Result<ExperimentReport> {
    let p: OscillatorParams = ctx.cfg.params()?;
    if p.temperatures.is_empty() {
        return Err(Error::Config("params.temperatures must not be empty".into()));
    }
    let run = oscillator_run(ctx, &p)?;
    let mut report = ctx.report();
    ctx.out.table(&mut report, "c_of_t.csv", &oscillator_table(&run))?;
    oscillator_metrics(&mut report, &run);
    let settings = ctx.cfg.analysis.settings();
    let verdicts = p
        .temperatures
        .iter()
        .map(|&t| {
            settings
                .mss_check(&run.fit, t)
                .map(|v| json!({ "temperature": t, "verdict": v }))
        })
        .collect::<Result<Vec<_>>>()?;
    report.mss = Some(settings.mss_check(&run.fit, p.temperatures[0])?);
    report.metric("verdicts", verdicts);
    report.note("the bound is reported, not asserted: the model is not a thermal many-body system");
    Ok(report)
}

// ---------------------------------------------------------------- island vs sea

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct Packet {
    kick_strength: f64,
    q: f64,
    p: f64,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct IslandSeaParams {
    hbar: f64,
    basis_size: usize,
    kicks: u32,
    width: f64,
    island: Packet,
    sea: Packet,
    min_ratio: f64,
}

impl Default for IslandSeaParams {
    fn default() -> Self {
        Self {
            hbar: 0.1,
            basis_size: 511,
            kicks: 30,
            width: 1.0,
            island: Packet {
                kick_strength: 0.5,
                q: PI,
                p: 0.0,
            },
            sea: Packet {
                kick_strength: 10.0,
                q: 1.0,
                p: 0.5,
            },
            min_ratio: 5.0,
        }
    }
}

impl IslandSeaParams {
    fn spec(&self, packet: &Packet) -> KickedRotorSpec {
        KickedRotorSpec {
            kick_strength: packet.kick_strength,
            effective_planck: self.hbar,
            basis_size: self.basis_size,
        }
    }
}

fn island_grid(cfg: &RunConfig, p: &IslandSeaParams) -> Result<TimeGrid> {
    let grid = grid_or(cfg, None, || Ok(TimeGrid::kicks(p.kicks)))?;
    check_kicks(&grid)?;
    Ok(grid)
}

pub(crate) fn plan_island_sea(cfg: &RunConfig) -> Result<Dims> {
    let p: IslandSeaParams = cfg.params()?;
    island_grid(cfg, &p)?;
    let mut dims = Vec::new();
    for (name, packet) in [("island", &p.island), ("sea", &p.sea)] {
        let spec = ModelSpec::KickedRotor(p.spec(packet));
        dims.push((name.to_string(), super::config::model_dimension(&spec)?));
    }
    Ok(dims)
}

pub(crate) fn run_island_sea(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let p: IslandSeaParams = cfg.params()?;
    let grid = island_grid(cfg, &p)?;
    let ops = cfg.operators.clone().unwrap_or(OperatorsConfig {
        w: OperatorRef::new("p", 0),
        v: Some(OperatorRef::new("p", 0)),
    });
    let mut report = ctx.report();
    let mut rates = Vec::new();
    for (name, packet) in [("island", &p.island), ("sea", &p.sea)] {
        let model = build_model(&ModelSpec::KickedRotor(p.spec(packet)), ctx.opts.memory_cap)?;
        let w = ops.w.build(&model)?;
        let v = ops.require_v()?.build(&model)?;
        let state = PureConfig {
            state: PresetState::Wavepacket,
            index: 0,
            q: packet.q,
            p: packet.p,
            width: p.width,
        }
        .build(&model, ctx.seed)?;
        let c = squared_commutator(&model, &w, &v, &state, &grid)?;
        let out = ctx.out.sub(name)?;
        let mut part = ctx.report();
        part.experiment = format!("{}/{name}", cfg.experiment);
        out.table(
            &mut part,
            "c_of_t.csv",
            &CsvTable::new(grid.times(), "kicks").real("C", "1", c.values()),
        )?;
        analyze(ctx, &mut part, &c, None);
        part.metric("packet", packet);
        let fit = part
            .growth_fit
            .ok_or_else(|| Error::InsufficientData(format!("no growth fit for the {name} packet")))?;
        rates.push(fit.rate);
        out.report(&part)?;
        report.files.push(super::output::FileEntry {
            name: format!("{name}/c_of_t.csv"),
            columns: part.files[0].columns.clone(),
        });
        report.parts.insert(name.into(), part);
    }
    let (island, sea) = (rates[0], rates[1]);
    report.metric("island_rate", island);
    report.metric("sea_rate", sea);
    report.metric("rate_ratio", finite(sea / island));
    report.check(
        "sea_exceeds_island",
        sea >= p.min_ratio * island,
        sea - p.min_ratio * island,
        0.0,
    );
    report.note(
        "rate: log-linear fit on the detected growth window, or on every sample above the floor when \
         detection finds fewer than two points",
    );
    Ok(report)
}

// ---------------------------------------------------------------- Ehrenfest scaling

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EhrenfestParams {
    kick_strength: f64,
    momentum_span: f64,
    kicks: u32,
    saturation_fraction: f64,
    chaos_threshold: f64,
    hbars: Vec<f64>,
}

impl Default for EhrenfestParams {
    fn default() -> Self {
        let s = EhrenfestSetup::new(10.0);
        Self {
            kick_strength: s.kick_strength,
            momentum_span: s.momentum_span,
            kicks: s.kicks,
            saturation_fraction: s.saturation_fraction,
            chaos_threshold: s.chaos_threshold,
            hbars: vec![0.2, 0.1, 0.05],
        }
    }
}

impl EhrenfestParams {
    fn setup(&self) -> EhrenfestSetup {
        EhrenfestSetup {
            kick_strength: self.kick_strength,
            momentum_span: self.momentum_span,
            kicks: self.kicks,
            saturation_fraction: self.saturation_fraction,
            chaos_threshold: self.chaos_threshold,
        }
    }
}

pub(crate) fn plan_ehrenfest(cfg: &RunConfig) -> Result<Dims> {
    let p: EhrenfestParams = cfg.params()?;
    if p.hbars.len() < 3 {
        return Err(Error::Config("params.hbars needs at least 3 values".into()));
    }
    let setup = p.setup();
    p.hbars
        .iter()
        .map(|&h| {
            let spec = ModelSpec::KickedRotor(setup.rotor_spec(h));
            Ok((format!("hbar={h}"), super::config::model_dimension(&spec)?))
        })
        .collect()
}

pub(crate) fn run_ehrenfest(ctx: &Ctx) -> Result<ExperimentReport> {
    let p: EhrenfestParams = ctx.cfg.params()?;
    let settings = ctx.cfg.analysis.settings();
    let scaling = ehrenfest_scaling_with(&settings, &p.setup(), &p.hbars)?;
    let grid = scaling.points[0].series.grid().clone();
    let mut table = CsvTable::new(grid.times(), "kicks");
    for pt in &scaling.points {
        table = table.real(&format!("C_hbar_{}", pt.hbar), "1", pt.series.values());
    }
    let mut report = ctx.report();
    ctx.out.table(&mut report, "c_of_t.csv", &table)?;
    let points: Vec<_> = scaling
        .points
        .iter()
        .map(|pt| {
            json!({
                "hbar": pt.hbar,
                "basis_size": pt.basis_size,
                "t_sat": pt.saturation.t_sat,
                "plateau": pt.saturation.plateau,
                "method": pt.saturation.method,
                "fit": pt.fit,
            })
        })
        .collect();
    // ordered by decreasing ħ, t_sat should increase
    let mut order: Vec<_> = scaling.points.iter().collect();
    order.sort_by(|a, b| b.hbar.total_cmp(&a.hbar));
    let monotone = order.windows(2).all(|w| w[1].saturation.t_sat > w[0].saturation.t_sat);
    report.metric("points", points);
    report.metric("slope", finite(scaling.slope));
    report.metric("intercept", finite(scaling.intercept));
    report.metric("applicable", scaling.applicable);
    report.metric("classical_lyapunov", scaling.classical_lyapunov);
    report.check("t_sat_monotone", monotone, scaling.slope, 0.0);
    report.check("slope_positive", scaling.slope > 0.0, scaling.slope, 0.0);
    // quantum–classical comparison at the smallest ħ
    if let Some(fit) = order.last().and_then(|pt| pt.fit) {
        report.growth_fit = Some(fit);
        report.metric(
            "bridge",
            json!({
                "hbar": order.last().map(|pt| pt.hbar),
                "quantum_rate": fit.rate,
                "classical_lyapunov": scaling.classical_lyapunov,
                "rate_over_lyapunov": finite(fit.rate / scaling.classical_lyapunov),
                "rate_over_twice_lyapunov": finite(fit.rate / (2.0 * scaling.classical_lyapunov)),
            }),
        );
    }
    report.provenance.saturation_proxy = Some(format!(
        "log-interpolated first crossing of {} x plateau (plateau = mean of trailing {}% of samples)",
        p.saturation_fraction,
        settings.plateau_fraction * 100.0
    ));
    report.note(scaling.note.clone());
    report.note("W = V = cos(theta) at infinite temperature on a momentum torus of fixed span");
    if scaling
        .points
        .iter()
        .any(|pt| pt.saturation.method == SaturationMethod::Unsaturated)
    {
        report.note("some series never reached the saturation level; extend params.kicks");
    }
    Ok(report)
}

// ---------------------------------------------------------------- cat map Koopman

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct KoopmanParams {
    map: TorusMap,
    resolution: usize,
    steps: usize,
    decay_fraction: f64,
    decay_within: usize,
}

impl Default for KoopmanParams {
    fn default() -> Self {
        Self {
            map: TorusMap::Cat,
            resolution: 50,
            steps: 10,
            decay_fraction: 0.1,
            decay_within: 5,
        }
    }
}

pub(crate) fn plan_koopman(cfg: &RunConfig) -> Result<Dims> {
    let p: KoopmanParams = cfg.params()?;
    p.map.validate()?;
    if p.resolution < 8 {
        return Err(Error::Config(format!(
            "params.resolution = {} must be >= 8",
            p.resolution
        )));
    }
    Ok(vec![("cells".into(), p.resolution * p.resolution)])
}

pub(crate) fn run_koopman(ctx: &Ctx) -> Result<ExperimentReport> {
    let p: KoopmanParams = ctx.cfg.params()?;
    let grid = koopman_matrix(&p.map, p.resolution)?;
    let period = p.map.period();
    let f = grid.sample(|x, _| (TAU * x / period).cos());
    let corr = koopman_correlation(&grid, &f, &f, p.steps)?;
    let c0 = corr.values()[0];
    let normalized: Vec<f64> = corr.values().iter().map(|v| v / c0).collect();
    let mut report = ctx.report();
    ctx.out.table(
        &mut report,
        "classical.csv",
        &CsvTable::new(corr.times(), "steps")
            .real("corr", "1", corr.values())
            .real("corr_normalized", "1", &normalized),
    )?;

    let cells = grid.num_cells();
    let uniform = vec![1.0 / cells as f64; cells];
    let pushed = grid.push_density(&uniform)?;
    let stationarity = pushed
        .iter()
        .zip(&uniform)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let density: Vec<f64> = f.iter().map(|v| 1.0 + v).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_change = (norm(&grid.push_density(&density)?) - norm(&density)).abs() / norm(&density);
    let decay_step = normalized.iter().position(|v| v.abs() < p.decay_fraction);

    report.metric("is_permutation", grid.is_permutation());
    report.metric("stationarity_deviation", stationarity);
    report.metric("density_norm_change", norm_change);
    report.metric("decay_step", decay_step);
    report.check(
        "permutation",
        grid.is_permutation(),
        if grid.is_permutation() { 1.0 } else { 0.0 },
        1.0,
    );
    report.check("uniform_stationary", stationarity < 1e-12, stationarity, 1e-12);
    report.check(
        "correlation_decay",
        decay_step.is_some_and(|k| k <= p.decay_within),
        decay_step.map_or(f64::INFINITY, |k| k as f64),
        p.decay_within as f64,
    );
    report.note("f = g = cos(2 pi x / period) sampled at cell corners; Ulam indicator basis");
    Ok(report)
}

// ---------------------------------------------------------------- classical Lyapunov

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LyapunovParams {
    steps: usize,
    standard_kicks: Vec<f64>,
    seed_x: f64,
    seed_p: f64,
    fd_delta: f64,
    fd_steps: usize,
    fd_tolerance: f64,
    determinant_steps: usize,
    portrait_kick: f64,
    portrait_orbits: usize,
    portrait_points: usize,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self {
            steps: 100_000,
            standard_kicks: vec![0.0, 10.0],
            seed_x: 1.0,
            seed_p: 0.5,
            fd_delta: 1e-7,
            fd_steps: 8,
            fd_tolerance: 1e-4,
            determinant_steps: 10_000,
            portrait_kick: 0.97,
            portrait_orbits: 24,
            portrait_points: 400,
        }
    }
}

pub(crate) fn plan_lyapunov(cfg: &RunConfig) -> Result<Dims> {
    let p: LyapunovParams = cfg.params()?;
    for &k in p.standard_kicks.iter().chain([&p.portrait_kick]) {
        TorusMap::standard(k).map_err(|e| Error::Config(format!("params: {e}")))?;
    }
    if p.steps < 100 {
        return Err(Error::Config("params.steps must be >= 100".into()));
    }
    Ok(Vec::new())
}

pub(crate) fn run_lyapunov(ctx: &Ctx) -> Result<ExperimentReport> {
    let p: LyapunovParams = ctx.cfg.params()?;
    let mut report = ctx.report();

    // phase-space portrait of the standard map: one orbit per seed on a diagonal
    let portrait = TorusMap::standard(p.portrait_kick)?;
    let (mut t, mut theta, mut mom, mut id) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..p.portrait_orbits {
        let frac = (k as f64 + 0.5) / p.portrait_orbits as f64;
        let s0 = MapState::new(&portrait, PI + 0.3 * frac, TAU * frac);
        for (n, s) in orbit(&portrait, s0, p.portrait_points - 1).into_iter().enumerate() {
            t.push(n as f64);
            theta.push(s.x);
            mom.push(s.p);
            id.push(k as f64);
        }
    }
    ctx.out.table(
        &mut report,
        "classical.csv",
        &CsvTable::new(&t, "steps")
            .real("theta", "rad", &theta)
            .real("p", "1", &mom)
            .real("orbit", "1", &id),
    )?;

    let seed = MapState {
        x: p.seed_x,
        p: p.seed_p,
    };
    let cat = TorusMap::Cat;
    let cat_seed = MapState::new(&cat, seed.x / TAU, seed.p / TAU);
    let cat_rate = tangent_lyapunov(&cat, cat_seed, p.steps);
    let cat_exact = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    report.metric("cat_lyapunov", cat_rate);
    report.metric("cat_lyapunov_exact", cat_exact);
    report.check(
        "cat_lyapunov",
        (cat_rate - cat_exact).abs() < 1e-6,
        (cat_rate - cat_exact).abs(),
        1e-6,
    );

    let mut standard = Vec::new();
    for &k in &p.standard_kicks {
        let map = TorusMap::standard(k)?;
        let rate = tangent_lyapunov(&map, MapState::new(&map, seed.x, seed.p), p.steps);
        let det = tangent_evolve(&map, MapState::new(&map, seed.x, seed.p), p.determinant_steps).determinant();
        standard.push(json!({
            "kick_strength": k,
            "lyapunov": rate,
            "reference_ln_k_over_2": (k > 2.0).then(|| (k / 2.0).ln()),
            "determinant_drift": (det - 1.0).abs(),
        }));
        if k == 0.0 {
            report.check("free_rotor_lyapunov", rate < 1e-2, rate, 1e-2);
        }
        report.check(
            &format!("determinant_k{k}"),
            (det - 1.0).abs() < 1e-8,
            (det - 1.0).abs(),
            1e-8,
        );
    }
    report.metric("standard_map", standard);

    let fd_errors: Vec<f64> = (1..=p.fd_steps)
        .map(|n| {
            let exact = tangent_evolve(&cat, cat_seed, n).matrix()[(0, 0)];
            (sensitivity_fd(&cat, cat_seed, n, p.fd_delta) - exact).abs() / exact.abs()
        })
        .collect();
    let fd_max = fd_errors.iter().copied().fold(0.0, f64::max);
    let breakdown = sensitivity_breakdown(&cat, cat_seed, p.fd_delta, 64, p.fd_tolerance);
    report.metric("fd_relative_errors", &fd_errors);
    report.metric("fd_breakdown_step", breakdown);
    report.check("fd_matches_tangent", fd_max <= p.fd_tolerance, fd_max, p.fd_tolerance);
    Ok(report)
}

// ---------------------------------------------------------------- recurrence

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RecurrenceParams {
    periods: usize,
    points_per_period: usize,
    tolerance: f64,
    period_tolerance: f64,
}

impl Default for RecurrenceParams {
    fn default() -> Self {
        Self {
            periods: 2,
            points_per_period: 200,
            tolerance: 1e-6,
            period_tolerance: 1e-9,
        }
    }
}

fn recurrence_spec(cfg: &RunConfig) -> ModelSpec {
    cfg.model.clone().unwrap_or(ModelSpec::SpinChain(SpinChainSpec {
        length: 2,
        coupling: 1.0,
        field_x: 0.0,
        field_z: 0.5,
        boundary: Boundary::Open,
    }))
}

pub(crate) fn plan_recurrence(cfg: &RunConfig) -> Result<Dims> {
    let p: RecurrenceParams = cfg.params()?;
    if p.periods == 0 || p.points_per_period == 0 {
        return Err(Error::Config(
            "params.periods and params.points_per_period must be >= 1".into(),
        ));
    }
    let spec = recurrence_spec(cfg);
    if matches!(spec, ModelSpec::KickedRotor(_)) {
        return Err(Error::Config("recurrence_demo needs a Hamiltonian model".into()));
    }
    model_dims(&spec)
}

pub(crate) fn run_recurrence(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let p: RecurrenceParams = cfg.params()?;
    let spec = recurrence_spec(cfg);
    let model = build_model(&spec, ctx.opts.memory_cap)?;
    let h = model
        .hamiltonian()
        .ok_or_else(|| Error::Config("recurrence_demo needs a Hamiltonian model".into()))?;
    let energies: Vec<f64> = HermitianSpectrum::new(h)?.eigenvalues().iter().copied().collect();
    let period = common_period(&energies, p.period_tolerance)
        .ok_or_else(|| Error::Config("the spectrum has no common period; set model.field_x = 0".into()))?;
    let psi = match &cfg.ensemble {
        Some(EnsembleConfig::Pure(pc)) => pc.build(&model, ctx.seed)?,
        Some(_) => return Err(Error::Config("recurrence_demo needs ensemble.kind = pure".into())),
        None => PureConfig::new(PresetState::Plus).build(&model, ctx.seed)?,
    };
    let grid = match &cfg.grid {
        Some(g) => g.build()?,
        None => {
            let n = p.periods * p.points_per_period;
            TimeGrid::new(
                (0..=n)
                    .map(|k| period * k as f64 / p.points_per_period as f64)
                    .collect(),
            )?
        }
    };
    let fid = recurrence_fidelity(&model, &psi, &grid)?;
    let at_period = recurrence_fidelity(&model, &psi, &TimeGrid::new(vec![period])?)?.values()[0];
    let minimum = fid.values().iter().copied().fold(1.0, f64::min);

    let mut report = ctx.report();
    ctx.out.table(
        &mut report,
        "recurrence.csv",
        &CsvTable::new(grid.times(), "1/J").real("fidelity", "1", fid.values()),
    )?;
    report.metric("energies", &energies);
    report.metric("period", period);
    report.metric("fidelity_at_period", at_period);
    report.metric("fidelity_min", minimum);
    report.check("revival", at_period > 1.0 - p.tolerance, 1.0 - at_period, p.tolerance);
    Ok(report)
}
