//! Product-basis enumeration, the precedence relation on dot-level vectors,
//! and the single-mode ladder bookkeeping (photon offsets and phase slopes).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use thiserror::Error;

use crate::model::{Validated, HBAR};

/// One basis vector |A⟩|F⟩: a level per dot and a photon count per mode.
///
/// Levels are stored 0-based (0 = ground). The text form is 1-based, matching
/// the labels used in output files: `A21_F10` puts dot 1 in its second level,
/// dot 2 in its ground level, one photon in mode 1 and none in mode 2. When
/// any component needs more than one digit the components are dash-joined,
/// as in `A2-11_F0-12`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub levels: Vec<u8>,
    pub photons: Vec<u32>,
}

impl BasisLabel {
    pub fn new(levels: Vec<u8>, photons: Vec<u32>) -> Self {
        Self { levels, photons }
    }

    /// Total photon number over all modes.
    pub fn photon_sum(&self) -> u32 {
        self.photons.iter().sum()
    }

    /// Sum of 0-based level indices over all dots.
    pub fn dot_excitation(&self) -> u32 {
        self.levels.iter().map(|&r| u32::from(r)).sum()
    }

    fn sort_key(&self) -> (Vec<u8>, u32, Vec<u32>) {
        (self.levels.clone(), self.photon_sum(), self.photons.clone())
    }
}

/// Orders labels the way [`build_basis`] lays them out: dot vectors
/// lexicographic, then photon vectors by total photon number, then
/// lexicographic.
impl Ord for BasisLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for BasisLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn write_components<T: Into<u64> + Copy>(
    f: &mut fmt::Formatter<'_>,
    values: &[T],
    dashed: bool,
) -> fmt::Result {
    for (pos, v) in values.iter().enumerate() {
        if dashed && pos > 0 {
            write!(f, "-")?;
        }
        write!(f, "{}", (*v).into())?;
    }
    Ok(())
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_based: Vec<u64> = self.levels.iter().map(|&r| u64::from(r) + 1).collect();
        let dashed = one_based.iter().any(|&r| r > 9)
            || self.photons.iter().any(|&p| p > 9);
        write!(f, "A")?;
        write_components(f, &one_based, dashed)?;
        write!(f, "_F")?;
        write_components(f, &self.photons, dashed)?;
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LabelParseError {
    #[error("label {0:?} does not have the form A<levels>_F<photons>")]
    Shape(String),
    #[error("label {0:?} contains a non-numeric or zero level component")]
    Component(String),
}

fn parse_components(text: &str, label: &str) -> Result<Vec<u64>, LabelParseError> {
    let parts: Vec<&str> = if text.contains('-') {
        text.split('-').collect()
    } else {
        text.split("").filter(|s| !s.is_empty()).collect()
    };
    if parts.is_empty() {
        return Err(LabelParseError::Shape(label.to_string()));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<u64>()
                .map_err(|_| LabelParseError::Component(label.to_string()))
        })
        .collect()
}

impl FromStr for BasisLabel {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s
            .strip_prefix('A')
            .ok_or_else(|| LabelParseError::Shape(s.to_string()))?;
        let (levels_text, photons_text) = rest
            .split_once("_F")
            .ok_or_else(|| LabelParseError::Shape(s.to_string()))?;
        let one_based = parse_components(levels_text, s)?;
        let photons = parse_components(photons_text, s)?;
        let levels = one_based
            .iter()
            .map(|&r| {
                if (1..=256).contains(&r) {
                    Ok((r - 1) as u8)
                } else {
                    Err(LabelParseError::Component(s.to_string()))
                }
            })
            .collect::<Result<Vec<u8>, _>>()?;
        let photons = photons
            .iter()
            .map(|&p| {
                u32::try_from(p).map_err(|_| LabelParseError::Component(s.to_string()))
            })
            .collect::<Result<Vec<u32>, _>>()?;
        Ok(BasisLabel { levels, photons })
    }
}

/// All dot-level vectors for the given per-dot level counts, in lexicographic
/// order with the all-ground vector first.
pub fn enumerate_dot_vectors(level_counts: &[u8]) -> Vec<Vec<u8>> {
    level_counts
        .iter()
        .map(|&b| 0..b)
        .multi_cartesian_product()
        .collect()
}

/// The dot index and ordered level pair at which two comparable vectors differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub dot: usize,
    pub lower: u8,
    pub upper: u8,
}

impl Step {
    /// Level distance of the step; 1 for adjacent levels.
    pub fn span(&self) -> u8 {
        self.upper - self.lower
    }
}

/// Outcome of comparing two dot-level vectors.
///
/// Two vectors are comparable when they differ at exactly one dot; the one
/// holding the lower level there precedes the other. Any level distance
/// counts, not just adjacent levels. Vectors differing at two or more dots
/// are incomparable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precedence {
    Equal,
    /// The first vector precedes the second.
    Precedes(Step),
    /// The first vector succeeds the second.
    Succeeds(Step),
    Incomparable,
}

/// Compare two dot-level vectors under the precedence relation.
///
/// Panics if the vectors have different lengths; callers always compare
/// vectors drawn from one enumeration.
pub fn precedes(a: &[u8], b: &[u8]) -> Precedence {
    assert_eq!(a.len(), b.len(), "dot vectors must have equal length");
    let mut step: Option<(usize, u8, u8)> = None;
    for (n, (&ra, &rb)) in a.iter().zip(b.iter()).enumerate() {
        if ra == rb {
            continue;
        }
        if step.is_some() {
            return Precedence::Incomparable;
        }
        step = Some((n, ra, rb));
    }
    match step {
        None => Precedence::Equal,
        Some((dot, ra, rb)) if ra < rb => Precedence::Precedes(Step {
            dot,
            lower: ra,
            upper: rb,
        }),
        Some((dot, ra, rb)) => Precedence::Succeeds(Step {
            dot,
            lower: rb,
            upper: ra,
        }),
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BasisError {
    #[error(" this operation needs a single-mode system, got {modes} modes")]
    MultiMode { modes: usize },
    #[error("the first vector must precede the second")]
    NotPreceding,
}

/// Phase slope Λ for a comparable pair a ≺ b in a single-mode system.
///
/// Λ = ω − Ω, where ω is the positive transition frequency of the level pair
/// the vectors differ by and Ω is the mode frequency; zero at resonance.
pub fn lambda_exponent(system: &Validated, a: &[u8], b: &[u8]) -> Result<f64, BasisError> {
    if system.mode_count() != 1 {
        return Err(BasisError::MultiMode {
            modes: system.mode_count(),
        });
    }
    let Precedence::Precedes(step) = precedes(a, b) else {
        return Err(BasisError::NotPreceding);
    };
    let upper = system.level(step.dot, usize::from(step.upper));
    let lower = system.level(step.dot, usize::from(step.lower));
    Ok((upper - lower) / HBAR - system.mode_frequency(0))
}

/// Photon offsets ς aligning each dot vector's ladder slot, anchored so that
/// the first vector has offset zero.
///
/// The offset is the excitation count relative to the first vector, which is
/// the unique assignment satisfying ς_upper = ς_lower + 1 across every
/// adjacent-level step. Comparable pairs spanning more than one level cannot
/// be absorbed by any single photon offset; systems that couple across such
/// pairs are rejected later, when ladder matrices are assembled.
pub fn ladder_offsets(vectors: &[Vec<u8>]) -> Vec<i64> {
    assert!(!vectors.is_empty(), "need at least one dot vector");
    let excitation =
        |v: &[u8]| -> i64 { v.iter().map(|&r| i64::from(r)).sum() };
    let base = excitation(&vectors[0]);
    let sigma: Vec<i64> = vectors.iter().map(|v| excitation(v) - base).collect();
    for (i, vi) in vectors.iter().enumerate() {
        for (j, vj) in vectors.iter().enumerate().skip(i + 1) {
            if let Precedence::Precedes(step) = precedes(vi, vj) {
                if step.span() == 1 {
                    assert_eq!(
                        sigma[j],
                        sigma[i] + 1,
                        "ladder offsets inconsistent between {vi:?} and {vj:?}"
                    );
                }
            }
        }
    }
    sigma
}

/// Phase exponents θ per dot vector for a single-mode system, anchored so
/// that the first vector has θ = 0.
///
/// θ accumulates Λ along precedence steps: θ_b = θ_a + Λ(a, b) for every
/// adjacent-level pair a ≺ b. The returned values use the closed form
/// θ_i = (E(A_i) − E(A_0))/ħ − ς_i·Ω, and every adjacent-level pair is
/// checked against the recurrence before returning.
pub fn phase_exponents(
    system: &Validated,
    vectors: &[Vec<u8>],
) -> Result<Vec<f64>, BasisError> {
    if system.mode_count() != 1 {
        return Err(BasisError::MultiMode {
            modes: system.mode_count(),
        });
    }
    assert!(!vectors.is_empty(), "need at least one dot vector");
    let omega = system.mode_frequency(0);
    let energy = |v: &[u8]| -> f64 {
        v.iter()
            .enumerate()
            .map(|(n, &r)| system.level(n, usize::from(r)))
            .sum()
    };
    let sigma = ladder_offsets(vectors);
    let base = energy(&vectors[0]);
    let theta: Vec<f64> = vectors
        .iter()
        .zip(sigma.iter())
        .map(|(v, &s)| (energy(v) - base) / HBAR - s as f64 * omega)
        .collect();

    let scale = theta.iter().fold(1.0_f64, |m, t| m.max(t.abs()));
    for (i, vi) in vectors.iter().enumerate() {
        for (j, vj) in vectors.iter().enumerate() {
            if let Precedence::Precedes(step) = precedes(vi, vj) {
                if step.span() == 1 {
                    let lambda = lambda_exponent(system, vi, vj)?;
                    let residual = (theta[j] - theta[i] - lambda).abs();
                    assert!(
                        residual <= 1e-12 * scale.max(lambda.abs()),
                        "phase exponents inconsistent between {vi:?} and {vj:?}"
                    );
                }
            }
        }
    }
    Ok(theta)
}

/// The truncated, deterministically ordered product basis.
#[derive(Clone, Debug)]
pub struct BasisSet {
    labels: Vec<BasisLabel>,
    index: HashMap<BasisLabel, usize>,
    level_counts: Vec<u8>,
    mode_count: usize,
    excitation_cap: u32,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &BasisLabel {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn position(&self, label: &BasisLabel) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn level_counts(&self) -> &[u8] {
        &self.level_counts
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn excitation_cap(&self) -> u32 {
        self.excitation_cap
    }

    /// Label list as a JSON array, for debugging dumps.
    pub fn labels_json(&self) -> String {
        let names: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        serde_json::to_string_pretty(&names).expect("label strings serialize")
    }

    /// Assemble a basis from an explicit label list, e.g. a restriction of a
    /// larger basis. The caller keeps the metadata of the parent system.
    pub fn from_labels(
        labels: Vec<BasisLabel>,
        level_counts: Vec<u8>,
        mode_count: usize,
        excitation_cap: u32,
    ) -> BasisSet {
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        BasisSet {
            labels,
            index,
            level_counts,
            mode_count,
            excitation_cap,
        }
    }
}

/// Enumerate every |A⟩|F⟩ with total photon number within the cap.
///
/// Ordering: dot vectors lexicographic, photon vectors by total photon
/// number then lexicographic. The layout is stable across runs.
pub fn build_basis(system: &Validated) -> BasisSet {
    let level_counts = system.level_counts();
    let mode_count = system.mode_count();
    let cap = system.excitation_cap();

    let mut photon_vectors: Vec<Vec<u32>> = (0..mode_count)
        .map(|_| 0..=cap)
        .multi_cartesian_product()
        .filter(|f| f.iter().sum::<u32>() <= cap)
        .collect();
    photon_vectors.sort_by_key(|f| (f.iter().sum::<u32>(), f.clone()));

    let mut labels = Vec::new();
    for levels in enumerate_dot_vectors(&level_counts) {
        for photons in &photon_vectors {
            labels.push(BasisLabel::new(levels.clone(), photons.clone()));
        }
    }
    let index = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), i))
        .collect();
    BasisSet {
        labels,
        index,
        level_counts,
        mode_count,
        excitation_cap: cap,
    }
}
