use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisSettings;
use crate::error::{Error, Result};
use crate::hilbert::{
    dense_bytes, gibbs_state, CVector, DensityMatrix, HermitianSpectrum, PureState, StateRef, C64, DEFAULT_MEMORY_CAP,
};
use crate::models::{
    build_inverted_oscillator, build_kicked_rotor, build_spin_chain_with_cap, coherent_wavepacket, ModelInstance,
    ModelSpec, PhasePoint,
};
use crate::scrambling::TimeGrid;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "OTOC_LAB_OUTPUT_ROOT";

/// A parsed run configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<OperatorsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Experiment-specific parameters, checked by the experiment itself.
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub params: toml::Table,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// The `[params]` table as an experiment's typed parameter struct.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T> {
        T::deserialize(toml::Value::Table(self.params.clone())).map_err(|e| Error::Config(format!("params: {e}")))
    }

    pub fn require_model(&self) -> Result<&ModelSpec> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config(format!("experiment '{}' needs a [model] section", self.experiment)))
    }

    pub fn require_operators(&self) -> Result<&OperatorsConfig> {
        self.operators
            .as_ref()
            .ok_or_else(|| Error::Config(format!("experiment '{}' needs an [operators] section", self.experiment)))
    }

    pub fn require_grid(&self) -> Result<&GridConfig> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config(format!("experiment '{}' needs a [grid] section", self.experiment)))
    }

    pub fn ensemble_or_default(&self) -> EnsembleConfig {
        self.ensemble.clone().unwrap_or(EnsembleConfig::InfiniteTemperature)
    }
}

/// Operator named by a model label (or `flip` for the global spin flip) on a site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRef {
    pub label: String,
    #[serde(default)]
    pub site: usize,
}

impl OperatorRef {
    pub fn new(label: &str, site: usize) -> Self {
        Self {
            label: label.into(),
            site,
        }
    }

    pub fn build(&self, model: &ModelInstance) -> Result<crate::hilbert::Operator> {
        if self.label == "flip" {
            model.spin_flip()
        } else {
            model.local_operator(self.site, &self.label)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorsConfig {
    pub w: OperatorRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<OperatorRef>,
}

impl OperatorsConfig {
    pub fn require_v(&self) -> Result<&OperatorRef> {
        self.v
            .as_ref()
            .ok_or_else(|| Error::Config("operators.v is required by this experiment".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetState {
    /// Computational basis state with index `index`.
    Basis,
    /// Every qubit in `|0⟩` (`Z = +1`).
    AllUp,
    /// Alternating `|0101…⟩`.
    Neel,
    /// Every qubit in `|+⟩`.
    Plus,
    /// Haar-random state drawn from the run seed.
    Random,
    /// Lowest eigenvector of the Hamiltonian.
    Ground,
    /// Gaussian packet at `(q, p)` (rotor or oscillator).
    Wavepacket,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureConfig {
    pub state: PresetState,
    #[serde(default)]
    pub index: usize,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub p: f64,
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

impl PureConfig {
    pub fn new(state: PresetState) -> Self {
        Self {
            state,
            index: 0,
            q: 0.0,
            p: 0.0,
            width: 1.0,
        }
    }

    pub fn build(&self, model: &ModelInstance, seed: u64) -> Result<PureState> {
        let space = model.space();
        let qubits = || {
            if space.is_qubit_chain() {
                Ok(space.num_sites())
            } else {
                Err(Error::Config(format!(
                    "ensemble.state = {:?} needs a qubit chain",
                    self.state
                )))
            }
        };
        match self.state {
            PresetState::Basis => PureState::basis(space, self.index),
            PresetState::AllUp => PureState::basis(space, 0),
            PresetState::Neel => {
                let levels: Vec<usize> = (0..qubits()?).map(|k| k % 2).collect();
                PureState::product_basis(space, &levels)
            }
            PresetState::Plus => {
                let l = qubits()?;
                let amp = C64::new((0.5f64).powf(l as f64 / 2.0), 0.0);
                PureState::new(space.clone(), CVector::from_element(space.total_dim(), amp))
            }
            PresetState::Random => Ok(PureState::random(space, &mut ChaCha8Rng::seed_from_u64(seed))),
            PresetState::Ground => {
                let h = model
                    .hamiltonian()
                    .ok_or_else(|| Error::Config("ensemble.state = ground needs a Hamiltonian model".into()))?;
                let s = HermitianSpectrum::new(h)?;
                PureState::normalized(space.clone(), s.eigenvectors().column(0).into_owned())
            }
            PresetState::Wavepacket => coherent_wavepacket(model, PhasePoint { q: self.q, p: self.p }, self.width),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleConfig {
    InfiniteTemperature,
    Gibbs { beta: f64 },
    Pure(PureConfig),
}

/// A state owned by a run, borrowed as [`StateRef`] by the diagnostics.
pub enum OwnedState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl OwnedState {
    pub fn as_ref(&self) -> StateRef<'_> {
        match self {
            OwnedState::Pure(p) => StateRef::Pure(p),
            OwnedState::Mixed(r) => StateRef::Mixed(r),
        }
    }
}

impl EnsembleConfig {
    pub fn build(&self, model: &ModelInstance, seed: u64) -> Result<OwnedState> {
        Ok(match self {
            EnsembleConfig::InfiniteTemperature => OwnedState::Mixed(DensityMatrix::maximally_mixed(model.space())),
            EnsembleConfig::Gibbs { beta } => {
                let h = model
                    .hamiltonian()
                    .ok_or_else(|| Error::Config("ensemble.kind = gibbs needs a Hamiltonian model".into()))?;
                OwnedState::Mixed(gibbs_state(h, *beta).map_err(|e| Error::Config(format!("ensemble.beta: {e}")))?)
            }
            EnsembleConfig::Pure(p) => OwnedState::Pure(p.build(model, seed)?),
        })
    }

    /// Temperature implied by the ensemble, if any.
    pub fn temperature(&self) -> Option<f64> {
        match self {
            EnsembleConfig::Gibbs { beta } if *beta > 0.0 => Some(1.0 / beta),
            _ => None,
        }
    }
}

/// Time grid: explicit times, evenly spaced points, or kick counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridConfig {
    Times { times: Vec<f64> },
    Uniform { start: f64, end: f64, points: usize },
    Kicks { kicks: u32 },
}

impl GridConfig {
    pub fn build(&self) -> Result<TimeGrid> {
        let grid = match self {
            GridConfig::Times { times } => TimeGrid::new(times.clone()),
            GridConfig::Uniform { start, end, points } => TimeGrid::uniform(*start, *end, *points),
            GridConfig::Kicks { kicks } => Ok(TimeGrid::kicks(*kicks)),
        };
        grid.map_err(|e| Error::Config(format!("grid: {e}")))
    }

    /// Grid checked against the model's time convention.
    pub fn build_for(&self, model: &ModelSpec) -> Result<TimeGrid> {
        let grid = self.build()?;
        if matches!(model, ModelSpec::KickedRotor(_)) {
            check_kicks(&grid)?;
        }
        Ok(grid)
    }
}

pub(crate) fn check_kicks(grid: &TimeGrid) -> Result<()> {
    if let Some((k, t)) = grid
        .times()
        .iter()
        .enumerate()
        .find(|(_, t)| t.fract() != 0.0 || **t < 0.0)
    {
        return Err(Error::Config(format!(
            "grid.times[{k}] = {t} is not a nonnegative integer kick count (Floquet model)"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub fit: bool,
    pub saturation: bool,
    pub mss: bool,
    /// Temperature for the chaos-bound check; defaults to the Gibbs ensemble's.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// Values at or below this are excluded from growth windows.
    pub floor: f64,
    pub ceiling_fraction: f64,
    /// Fixed `[t_start, t_end]` fit window instead of detection.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    pub min_window_points: usize,
    pub residual_cap: f64,
    pub plateau_band: f64,
    pub plateau_fraction: f64,
    pub decade_span: f64,
}

impl AnalysisConfig {
    pub fn settings(&self) -> AnalysisSettings {
        AnalysisSettings {
            min_window_points: self.min_window_points,
            residual_cap: self.residual_cap,
            plateau_band: self.plateau_band,
            plateau_fraction: self.plateau_fraction,
            decade_span: self.decade_span,
        }
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let d = AnalysisSettings::default();
        Self {
            fit: true,
            saturation: true,
            mss: false,
            temperature: None,
            floor: 1e-12,
            ceiling_fraction: 0.1,
            fit_window: None,
            min_window_points: d.min_window_points,
            residual_cap: d.residual_cap,
            plateau_band: d.plateau_band,
            plateau_fraction: d.plateau_fraction,
            decade_span: d.decade_span,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// Process-level overrides applied on top of a config.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub memory_cap: u128,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            output_dir: None,
            seed: None,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

impl RunOptions {
    /// `--output-dir`, else the config's `output.dir`, else `$OTOC_LAB_OUTPUT_ROOT/<experiment>`
    /// (`otoc-output/<experiment>` when the variable is unset).
    pub fn resolve_output(&self, cfg: &RunConfig) -> PathBuf {
        if let Some(dir) = &self.output_dir {
            return dir.clone();
        }
        if let Some(dir) = &cfg.output.dir {
            return dir.clone();
        }
        let root = std::env::var_os(OUTPUT_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("otoc-output"));
        root.join(&cfg.experiment)
    }

    pub fn seed(&self, cfg: &RunConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }
}

/// Hilbert-space dimension a model spec will need, without building it.
pub fn model_dimension(spec: &ModelSpec) -> Result<usize> {
    match spec {
        ModelSpec::SpinChain(s) => {
            s.validate()?;
            s.dimension()
                .ok_or_else(|| Error::Config(format!("model.length = {} overflows the dimension", s.length)))
        }
        ModelSpec::KickedRotor(s) => {
            s.validate()?;
            Ok(s.basis_size)
        }
        ModelSpec::InvertedOscillator(s) => {
            s.validate()?;
            Ok(s.truncation)
        }
        ModelSpec::Custom { name } => Err(Error::Config(format!(
            "custom model '{name}' cannot be built from a config"
        ))),
    }
}

pub fn check_budget(dim: usize, cap: u128) -> Result<()> {
    let bytes = dense_bytes(dim);
    if bytes > cap {
        return Err(Error::MemoryBudget { dim, bytes, cap });
    }
    Ok(())
}

pub fn build_model(spec: &ModelSpec, cap: u128) -> Result<ModelInstance> {
    check_budget(model_dimension(spec)?, cap)?;
    match spec {
        ModelSpec::SpinChain(s) => build_spin_chain_with_cap(s, cap),
        ModelSpec::KickedRotor(s) => build_kicked_rotor(s),
        ModelSpec::InvertedOscillator(s) => build_inverted_oscillator(s),
        ModelSpec::Custom { .. } => unreachable!("rejected by model_dimension"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = RunConfig::from_toml_str(
            r#"
            experiment = "chain_otoc"
            seed = 3
            [model]
            family = "spin_chain"
            length = 4
            coupling = 1.0
            field_x = 1.05
            field_z = 0.5
            boundary = "open"
            [operators]
            w = { label = "Z", site = 0 }
            v = { label = "Z", site = 3 }
            [ensemble]
            kind = "gibbs"
            beta = 0.5
            [grid]
            start = 0.0
            end = 2.0
            points = 5
            [analysis]
            mss = true
            residual_cap = 0.2
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.ensemble_or_default().temperature(), Some(2.0));
        assert_eq!(cfg.grid.unwrap().build().unwrap().len(), 5);
        assert_eq!(cfg.analysis.settings().residual_cap, 0.2);
        assert_eq!(cfg.analysis.settings().min_window_points, 8);
    }

    #[test]
    fn rejects_unknown_fields_with_context() {
        let err = RunConfig::from_toml_str("experiment = \"x\"\nbogus = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn pure_ensemble_and_grids() {
        let e: EnsembleConfig = toml::from_str("kind = \"pure\"\nstate = \"wavepacket\"\nq = 1.0").unwrap();
        assert!(matches!(
            e,
            EnsembleConfig::Pure(PureConfig {
                state: PresetState::Wavepacket,
                ..
            })
        ));
        let g: GridConfig = toml::from_str("times = [0.0, 0.5]").unwrap();
        let rotor = ModelSpec::KickedRotor(crate::models::KickedRotorSpec {
            kick_strength: 1.0,
            effective_planck: 0.5,
            basis_size: 5,
        });
        let err = g.build_for(&rotor).unwrap_err().to_string();
        assert!(err.contains("grid.times[1]"), "{err}");
        let k: GridConfig = toml::from_str("kicks = 4").unwrap();
        assert_eq!(k.build_for(&rotor).unwrap().len(), 5);
    }

    #[test]
    fn budget_refuses_large_chains() {
        let spec = ModelSpec::SpinChain(crate::models::SpinChainSpec::chaotic(20));
        let dim = model_dimension(&spec).unwrap();
        assert!(matches!(
            check_budget(dim, DEFAULT_MEMORY_CAP),
            Err(Error::MemoryBudget { .. })
        ));
        assert!(check_budget(256, DEFAULT_MEMORY_CAP).is_ok());
    }
}
