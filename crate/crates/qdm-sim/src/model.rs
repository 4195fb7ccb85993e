//! System description: dots, modes, couplings, units, and validation.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant in the internal unit system.
///
/// The engine works in units where energies are angular frequencies, so this
/// is 1.0; it is kept symbolic so the formulas read like the derivation.
pub const HBAR: f64 = 1.0;

/// One quantum dot: an ordered ladder of level energies.
///
/// Energies are stored as angular frequencies (E/hbar, rad/s), strictly
/// increasing with the level index. Index 0 is the ground level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DotSpec {
    pub levels: Vec<f64>,
}

impl DotSpec {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }
}

/// One cavity mode with angular frequency Omega (rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub frequency: f64,
}

/// Sparse coupling tables.
///
/// All keys use 0-based dot, level, and mode indices, and every level pair
/// is stored with the lower index first; the conjugate partners implied by
/// Hermiticity are generated, not stored. Values are complex:
///
/// - `gamma[(n, i, j)]`: dipole matrix element of dot n between levels i < j
///   (dimensionless),
/// - `g[(n, i, j, nu)]`: field coupling rate of that transition to mode nu
///   (rad/s),
/// - `eta[(n, i, j)]`: dot-dot coupling amplitude; products eta_n * conj(eta_m)
///   are rates (rad/s).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CouplingSet {
    gamma: BTreeMap<(usize, usize, usize), C64>,
    g: BTreeMap<(usize, usize, usize, usize), C64>,
    eta: BTreeMap<(usize, usize, usize), C64>,
}

impl CouplingSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a dipole matrix element for the transition i < j of dot n.
    pub fn set_gamma(&mut self, n: usize, i: usize, j: usize, value: C64) {
        assert!(i < j, "gamma level pair must be ordered: got ({i}, {j})");
        self.gamma.insert((n, i, j), value);
    }

    /// Insert a field coupling rate for the transition i < j of dot n and mode nu.
    pub fn set_g(&mut self, n: usize, i: usize, j: usize, nu: usize, value: C64) {
        assert!(i < j, "g level pair must be ordered: got ({i}, {j})");
        self.g.insert((n, i, j, nu), value);
    }

    /// Insert a dot-dot coupling amplitude for the transition i < j of dot n.
    pub fn set_eta(&mut self, n: usize, i: usize, j: usize, value: C64) {
        assert!(i < j, "eta level pair must be ordered: got ({i}, {j})");
        self.eta.insert((n, i, j), value);
    }

    pub fn gamma(&self, n: usize, i: usize, j: usize) -> C64 {
        self.gamma.get(&(n, i, j)).copied().unwrap_or(C64::ZERO)
    }

    pub fn g(&self, n: usize, i: usize, j: usize, nu: usize) -> C64 {
        self.g.get(&(n, i, j, nu)).copied().unwrap_or(C64::ZERO)
    }

    pub fn eta(&self, n: usize, i: usize, j: usize) -> C64 {
        self.eta.get(&(n, i, j)).copied().unwrap_or(C64::ZERO)
    }

    pub fn iter_gamma(&self) -> impl Iterator<Item = (&(usize, usize, usize), &C64)> {
        self.gamma.iter()
    }

    pub fn iter_g(&self) -> impl Iterator<Item = (&(usize, usize, usize, usize), &C64)> {
        self.g.iter()
    }

    pub fn iter_eta(&self) -> impl Iterator<Item = (&(usize, usize, usize), &C64)> {
        self.eta.iter()
    }

    fn scale(&mut self, freq_factor: f64) {
        // gamma is a dimensionless matrix element and is never rescaled.
        // eta enters the equations only through pairwise products, so each
        // entry carries the square root of the frequency conversion.
        for v in self.g.values_mut() {
            *v *= freq_factor;
        }
        let root = freq_factor.sqrt();
        for v in self.eta.values_mut() {
            *v *= root;
        }
    }
}

/// Unit system the raw config numbers are written in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Units {
    /// Plain frequencies; validation multiplies by 2 pi.
    #[serde(rename = "hz")]
    Hz,
    /// Angular frequencies; used as given.
    #[default]
    #[serde(rename = "rad_s")]
    RadPerSec,
}

/// Full system description as assembled from a config file or by hand.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub dots: Vec<DotSpec>,
    pub modes: Vec<ModeSpec>,
    pub couplings: CouplingSet,
    pub units: Units,
    /// Keep only energy-conserving field and dipole terms when true.
    pub rwa: bool,
    /// Hard cap on the total photon number of retained basis labels.
    pub excitation_cap: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("system needs at least one dot")]
    NoDots,
    #[error("system needs at least one mode")]
    NoModes,
    #[error("dot {dot} has {count} levels, need at least 2")]
    TooFewLevels { dot: usize, count: usize },
    #[error("dot {dot} levels must be finite and strictly increasing")]
    LevelsNotIncreasing { dot: usize },
    #[error("mode {mode} frequency must be finite and positive, got {value}")]
    BadModeFrequency { mode: usize, value: f64 },
    #[error("{table} coupling {key} is out of range for the declared dots/modes")]
    CouplingOutOfRange { table: &'static str, key: String },
    #[error("coupling {key} is not finite")]
    CouplingNotFinite { key: String },
    #[error("transition frequency needs two distinct levels, got ({a}, {b})")]
    DegenerateTransition { a: usize, b: usize },
    #[error("level index {index} out of range for dot {dot}")]
    LevelOutOfRange { dot: usize, index: usize },
    #[error("dot index {dot} out of range")]
    DotOutOfRange { dot: usize },
}

/// A config whose invariants have been checked and whose numbers are in
/// internal units (rad/s). Constructed only through [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Validated {
    config: SystemConfig,
}

impl Validated {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn dots(&self) -> &[DotSpec] {
        &self.config.dots
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.config.modes
    }

    pub fn couplings(&self) -> &CouplingSet {
        &self.config.couplings
    }

    pub fn rwa(&self) -> bool {
        self.config.rwa
    }

    pub fn excitation_cap(&self) -> u32 {
        self.config.excitation_cap
    }

    pub fn dot_count(&self) -> usize {
        self.config.dots.len()
    }

    pub fn mode_count(&self) -> usize {
        self.config.modes.len()
    }

    /// Level counts per dot, used everywhere basis labels are enumerated.
    pub fn level_counts(&self) -> Vec<u8> {
        self.config
            .dots
            .iter()
            .map(|d| d.level_count() as u8)
            .collect()
    }

    /// Level energy E_a/hbar of dot n (rad/s).
    pub fn level(&self, n: usize, a: usize) -> f64 {
        self.config.dots[n].levels[a]
    }

    pub fn mode_frequency(&self, nu: usize) -> f64 {
        self.config.modes[nu].frequency
    }
}

/// Check a raw config and convert it to internal units.
///
/// Idempotent: validating the config held by a `Validated` again is a no-op
/// because the unit tag is rewritten to rad/s along with the numbers.
pub fn validate(mut config: SystemConfig) -> Result<Validated, ModelError> {
    if config.dots.is_empty() {
        return Err(ModelError::NoDots);
    }
    if config.modes.is_empty() {
        return Err(ModelError::NoModes);
    }
    for (n, dot) in config.dots.iter().enumerate() {
        if dot.levels.len() < 2 {
            return Err(ModelError::TooFewLevels {
                dot: n,
                count: dot.levels.len(),
            });
        }
        let increasing = dot.levels.iter().all(|e| e.is_finite())
            && dot.levels.windows(2).all(|w| w[0] < w[1]);
        if !increasing {
            return Err(ModelError::LevelsNotIncreasing { dot: n });
        }
    }
    for (nu, mode) in config.modes.iter().enumerate() {
        if !(mode.frequency.is_finite() && mode.frequency > 0.0) {
            return Err(ModelError::BadModeFrequency {
                mode: nu,
                value: mode.frequency,
            });
        }
    }

    let dot_levels: Vec<usize> = config.dots.iter().map(|d| d.level_count()).collect();
    let modes = config.modes.len();
    for (&(n, i, j), v) in config.couplings.iter_gamma() {
        check_levels("gamma", n, i, j, &dot_levels)?;
        check_finite(format!("gamma[{n}][{i}][{j}]"), *v)?;
    }
    for (&(n, i, j), v) in config.couplings.iter_eta() {
        check_levels("eta", n, i, j, &dot_levels)?;
        check_finite(format!("eta[{n}][{i}][{j}]"), *v)?;
    }
    for (&(n, i, j, nu), v) in config.couplings.iter_g() {
        check_levels("g", n, i, j, &dot_levels)?;
        if nu >= modes {
            return Err(ModelError::CouplingOutOfRange {
                table: "g",
                key: format!("({n}, {i}, {j}, {nu})"),
            });
        }
        check_finite(format!("g[{n}][{i}][{j}][{nu}]"), *v)?;
    }

    if config.units == Units::Hz {
        let two_pi = std::f64::consts::TAU;
        for dot in &mut config.dots {
            for e in &mut dot.levels {
                *e *= two_pi;
            }
        }
        for mode in &mut config.modes {
            mode.frequency *= two_pi;
        }
        config.couplings.scale(two_pi);
        config.units = Units::RadPerSec;
    }

    Ok(Validated { config })
}

fn check_levels(
    table: &'static str,
    n: usize,
    i: usize,
    j: usize,
    dot_levels: &[usize],
) -> Result<(), ModelError> {
    let in_range = dot_levels.get(n).is_some_and(|&count| i < j && j < count);
    if in_range {
        Ok(())
    } else {
        Err(ModelError::CouplingOutOfRange {
            table,
            key: format!("({n}, {i}, {j})"),
        })
    }
}

fn check_finite(key: String, v: C64) -> Result<(), ModelError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(ModelError::CouplingNotFinite { key })
    }
}

/// Signed transition frequency omega_ab = (E_a - E_b)/hbar of dot n.
///
/// Positive when a is the upper level; antisymmetric in (a, b). Asking for
/// omega_aa is rejected rather than returning 0 so callers cannot silently
/// build a phase out of a non-transition.
pub fn transition_frequency(
    system: &Validated,
    n: usize,
    a: usize,
    b: usize,
) -> Result<f64, ModelError> {
    let dot = system
        .dots()
        .get(n)
        .ok_or(ModelError::DotOutOfRange { dot: n })?;
    if a == b {
        return Err(ModelError::DegenerateTransition { a, b });
    }
    for index in [a, b] {
        if index >= dot.levels.len() {
            return Err(ModelError::LevelOutOfRange { dot: n, index });
        }
    }
    Ok((dot.levels[a] - dot.levels[b]) / HBAR)
}
