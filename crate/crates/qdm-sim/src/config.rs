//! TOML run configuration: schema, parsing, and validation.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::basis::{build_basis, BasisLabel, BasisSet};
use crate::model::{
    validate, CouplingSet, DotSpec, ModeSpec, ModelError, SystemConfig, Units,
};
use crate::numeric::Solver;

fn default_rwa() -> bool {
    true
}

fn default_stride() -> u64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    units: Units,
    #[serde(default = "default_rwa")]
    rwa: bool,
    excitation_cap: u32,
    dots: Vec<FileDot>,
    #[serde(default)]
    modes: Vec<FileMode>,
    #[serde(default)]
    couplings: BTreeMap<String, [f64; 2]>,
    simulation: Option<FileSimulation>,
    initial: Option<BTreeMap<String, [f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDot {
    levels: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileMode {
    frequency: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSimulation {
    #[serde(default = "FileSimulation::default_solver")]
    solver: String,
    dt: f64,
    t_end: f64,
    #[serde(default = "default_stride")]
    output_stride: u64,
}

impl FileSimulation {
    fn default_solver() -> String {
        "rk4".to_string()
    }
}

/// Solution strategy named in a config or on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunSolver {
    Analytic,
    Euler,
    Rk4,
}

impl RunSolver {
    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        match name {
            "analytic" => Ok(RunSolver::Analytic),
            "euler" => Ok(RunSolver::Euler),
            "rk4" => Ok(RunSolver::Rk4),
            other => Err(ConfigError::BadSolver {
                name: other.to_string(),
            }),
        }
    }

    /// The stepping method, when this is a numeric solver.
    pub fn numeric(self) -> Option<Solver> {
        match self {
            RunSolver::Analytic => None,
            RunSolver::Euler => Some(Solver::Euler),
            RunSolver::Rk4 => Some(Solver::Rk4),
        }
    }
}

impl std::fmt::Display for RunSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunSolver::Analytic => write!(f, "analytic"),
            RunSolver::Euler => write!(f, "euler"),
            RunSolver::Rk4 => write!(f, "rk4"),
        }
    }
}

/// The `[simulation]` section after validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationSettings {
    pub solver: RunSolver,
    pub dt: f64,
    pub t_end: f64,
    pub output_stride: u64,
}

/// Everything a run needs, parsed and cross-checked.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub system: crate::model::Validated,
    pub basis: BasisSet,
    pub simulation: Option<SimulationSettings>,
    /// Dense amplitude vector over the basis, when `[initial]` is present.
    pub initial: Option<Vec<C64>>,
    /// SHA-256 of the raw config text, hex encoded.
    pub sha256: String,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("coupling key {key:?}: {reason}")]
    BadCouplingKey { key: String, reason: String },
    #[error("coupling key {key:?}: level pair must be ascending (file indices are 1-based)")]
    DisorderedPair { key: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown solver {name:?}; expected analytic, euler, or rk4")]
    BadSolver { name: String },
    #[error("simulation step size must be positive and finite, got {dt}")]
    BadStep { dt: f64 },
    #[error("simulation horizon must be at least one step, got {t_end}")]
    BadHorizon { t_end: f64 },
    #[error("output stride must be at least 1")]
    BadStride,
    #[error("initial label {label:?}: {reason}")]
    BadInitialLabel { label: String, reason: String },
    #[error(
        "initial state {label} has {photons} photons but the excitation cap is {cap}; \
         raise excitation_cap"
    )]
    InitialExceedsCap { label: String, photons: u32, cap: u32 },
    #[error("initial state norm² is {norm:.9}, expected 1 within 1e-9")]
    InitialNotNormalized { norm: f64 },
    #[error("the [initial] section has no entries")]
    EmptyInitial,
}

enum CouplingKey {
    Gamma(usize, usize, usize),
    G(usize, usize, usize, usize),
    Eta(usize, usize, usize),
}

fn parse_coupling_key(key: &str) -> Result<CouplingKey, ConfigError> {
    let bad = |reason: &str| ConfigError::BadCouplingKey {
        key: key.to_string(),
        reason: reason.to_string(),
    };
    let open = key
        .find('[')
        .ok_or_else(|| bad("expected bracketed indices like gamma[1][1][2]"))?;
    let (name, rest) = key.split_at(open);
    let mut indices = Vec::new();
    for part in rest.split('[').skip(1) {
        let digits = part
            .strip_suffix(']')
            .ok_or_else(|| bad("indices must each be enclosed in brackets"))?;
        let value: usize = digits
            .parse()
            .map_err(|_| bad("indices must be plain integers"))?;
        if value == 0 {
            return Err(bad("indices are 1-based; 0 is out of range"));
        }
        indices.push(value - 1);
    }
    let parsed = match (name, indices.as_slice()) {
        ("gamma", &[n, i, j]) => CouplingKey::Gamma(n, i, j),
        ("g", &[n, i, j, nu]) => CouplingKey::G(n, i, j, nu),
        ("eta", &[n, i, j]) => CouplingKey::Eta(n, i, j),
        ("gamma" | "eta", _) => {
            return Err(bad("expected three indices: [dot][lower][upper]"))
        }
        ("g", _) => return Err(bad("expected four indices: [dot][lower][upper][mode]")),
        _ => return Err(bad("unknown table; expected gamma, g, or eta")),
    };
    let (i, j) = match parsed {
        CouplingKey::Gamma(_, i, j) | CouplingKey::Eta(_, i, j) => (i, j),
        CouplingKey::G(_, i, j, _) => (i, j),
    };
    if i >= j {
        return Err(ConfigError::DisorderedPair {
            key: key.to_string(),
        });
    }
    Ok(parsed)
}

fn build_initial(
    basis: &BasisSet,
    entries: &BTreeMap<String, [f64; 2]>,
) -> Result<Vec<C64>, ConfigError> {
    if entries.is_empty() {
        return Err(ConfigError::EmptyInitial);
    }
    let mut state = vec![C64::ZERO; basis.len()];
    for (name, &[re, im]) in entries {
        let label: BasisLabel = name.parse().map_err(|e| ConfigError::BadInitialLabel {
            label: name.clone(),
            reason: format!("{e}"),
        })?;
        let shape_error = |reason: String| ConfigError::BadInitialLabel {
            label: name.clone(),
            reason,
        };
        if label.levels.len() != basis.level_counts().len() {
            return Err(shape_error(format!(
                "names {} dots, system has {}",
                label.levels.len(),
                basis.level_counts().len()
            )));
        }
        if label.photons.len() != basis.mode_count() {
            return Err(shape_error(format!(
                "names {} modes, system has {}",
                label.photons.len(),
                basis.mode_count()
            )));
        }
        for (n, (&at, &count)) in label
            .levels
            .iter()
            .zip(basis.level_counts())
            .enumerate()
        {
            if at >= count {
                return Err(shape_error(format!(
                    "dot {} has levels 1..={}, label asks for {}",
                    n + 1,
                    count,
                    at + 1
                )));
            }
        }
        if label.photon_sum() > basis.excitation_cap() {
            return Err(ConfigError::InitialExceedsCap {
                label: name.clone(),
                photons: label.photon_sum(),
                cap: basis.excitation_cap(),
            });
        }
        let position = basis
            .position(&label)
            .expect("checked labels are in the basis");
        state[position] = C64::new(re, im);
    }
    let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(ConfigError::InitialNotNormalized { norm });
    }
    Ok(state)
}

fn build_simulation(raw: &FileSimulation) -> Result<SimulationSettings, ConfigError> {
    let solver = RunSolver::parse(&raw.solver)?;
    if !(raw.dt.is_finite() && raw.dt > 0.0) {
        return Err(ConfigError::BadStep { dt: raw.dt });
    }
    if !(raw.t_end.is_finite() && raw.t_end >= raw.dt) {
        return Err(ConfigError::BadHorizon { t_end: raw.t_end });
    }
    if raw.output_stride == 0 {
        return Err(ConfigError::BadStride);
    }
    Ok(SimulationSettings {
        solver,
        dt: raw.dt,
        t_end: raw.t_end,
        output_stride: raw.output_stride,
    })
}

/// Parse and validate a config from TOML text.
pub fn load_config_str(text: &str) -> Result<LoadedConfig, ConfigError> {
    let raw: FileConfig = toml::from_str(text)?;

    let mut couplings = CouplingSet::new();
    for (key, &[re, im]) in &raw.couplings {
        let value = C64::new(re, im);
        match parse_coupling_key(key)? {
            CouplingKey::Gamma(n, i, j) => couplings.set_gamma(n, i, j, value),
            CouplingKey::G(n, i, j, nu) => couplings.set_g(n, i, j, nu, value),
            CouplingKey::Eta(n, i, j) => couplings.set_eta(n, i, j, value),
        }
    }

    let system = validate(SystemConfig {
        dots: raw
            .dots
            .iter()
            .map(|d| DotSpec {
                levels: d.levels.clone(),
            })
            .collect(),
        modes: raw
            .modes
            .iter()
            .map(|m| ModeSpec {
                frequency: m.frequency,
            })
            .collect(),
        couplings,
        units: raw.units,
        rwa: raw.rwa,
        excitation_cap: raw.excitation_cap,
    })?;
    let basis = build_basis(&system);

    let simulation = raw
        .simulation
        .as_ref()
        .map(build_simulation)
        .transpose()?;
    let initial = raw
        .initial
        .as_ref()
        .map(|entries| build_initial(&basis, entries))
        .transpose()?;

    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let sha256 = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();

    Ok(LoadedConfig {
        system,
        basis,
        simulation,
        initial,
        sha256,
    })
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    load_config_str(&fs::read_to_string(path)?)
}
