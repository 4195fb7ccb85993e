//! Closed-form propagation of single-mode ladders after folding out the
//! oscillating phases.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::basis::{enumerate_dot_vectors, BasisLabel};
use crate::model::HBAR;
use crate::numeric::{sample_times, IntegratorSpec, Trajectory};
use crate::rabi::RabiSystem;

/// A single-mode ladder folded to constant coefficients: iħ·dX/dt = Ξ·X.
#[derive(Clone, Debug)]
pub struct XiMatrix {
    /// Hermitian coefficient matrix, member order.
    pub matrix: Array2<C64>,
    /// The ladder's basis labels, most excited dot vector first.
    pub members: Vec<BasisLabel>,
    /// Rotating-frame slopes θ̃ in rad/s; the top member is the anchor at 0.
    pub theta: Vec<f64>,
    /// Photon offsets above the base: member i sits at `base_photons` + ς̃_i.
    pub sigma: Vec<u32>,
    /// Photon count paired with the fully excited dot vector.
    pub base_photons: u32,
    /// Positions of the members inside the generating system's basis.
    pub positions: Vec<usize>,
}

impl XiMatrix {
    pub fn dim(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("the ladder fold needs exactly one mode, this system has {modes}")]
    MultiMode { modes: usize },
    #[error("the ladder fold needs the rotating-wave form of the equations")]
    CounterRotating,
    #[error("ladder at base photon {base} needs excitation cap {needed}, cap is {cap}")]
    CapTooSmall { base: u32, needed: u32, cap: u32 },
    #[error("ladder member {label} is missing from the basis")]
    MissingLabel { label: String },
    #[error("term {target} ← {partner} leaves the ladder; use a numeric solver")]
    NotClosed { target: String, partner: String },
    #[error(
        "term {target} ← {partner} oscillates in the folded frame \
         (χ = {chi:.6e}, frame slope {expected:.6e}); use a numeric solver"
    )]
    PhaseMismatch {
        target: String,
        partner: String,
        chi: f64,
        expected: f64,
    },
    #[error("initial state norm² is {norm}, expected 1 (pass auto-normalize to rescale)")]
    NotNormalized { norm: f64 },
    #[error("folded matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("initial state has length {got}, ladder has {expected} members")]
    Dimension { expected: usize, got: usize },
    #[error("state {label} sits below every complete ladder; use a numeric solver")]
    BelowLadder { label: String },
    #[error("eigendecomposition failed: {0}")]
    Linalg(String),
}

/// Fold the ladder whose fully excited member holds `base_photons` photons.
///
/// Members are every dot vector in reversed lexicographic order, member i
/// paired with photons `base_photons` + ς̃_i where ς̃_i counts the missing
/// excitations relative to the top vector. In this pairing every surviving
/// coupling term has χ exactly equal to the frame slope difference, so the
/// folded system iħ·dX/dt = Ξ·X is time independent: Ξ carries −ħθ̃ on the
/// diagonal and the term coefficients off it. Terms that would leave the
/// member set or oscillate in the folded frame are rejected, pointing the
/// caller at the numeric solvers instead.
pub fn build_xi(system: &RabiSystem, base_photons: u32) -> Result<XiMatrix, AnalyticError> {
    let config = system.config();
    if config.mode_count() != 1 {
        return Err(AnalyticError::MultiMode {
            modes: config.mode_count(),
        });
    }
    if !system.rwa() {
        return Err(AnalyticError::CounterRotating);
    }

    let level_counts = config.level_counts();
    let exc_max: u32 = level_counts.iter().map(|&b| u32::from(b) - 1).sum();
    let cap = config.excitation_cap();
    if base_photons + exc_max > cap {
        return Err(AnalyticError::CapTooSmall {
            base: base_photons,
            needed: base_photons + exc_max,
            cap,
        });
    }

    let mut vectors = enumerate_dot_vectors(&level_counts);
    vectors.reverse();
    let omega = config.mode_frequency(0);
    let top_energy: f64 = vectors[0]
        .iter()
        .enumerate()
        .map(|(n, &r)| config.level(n, usize::from(r)))
        .sum();

    let dim = vectors.len();
    let mut members = Vec::with_capacity(dim);
    let mut theta = Vec::with_capacity(dim);
    let mut sigma = Vec::with_capacity(dim);
    let mut positions = Vec::with_capacity(dim);
    for vector in &vectors {
        let excitation: u32 = vector.iter().map(|&r| u32::from(r)).sum();
        let sigma_i = exc_max - excitation;
        let energy: f64 = vector
            .iter()
            .enumerate()
            .map(|(n, &r)| config.level(n, usize::from(r)))
            .sum();
        let label = BasisLabel::new(vector.clone(), vec![base_photons + sigma_i]);
        let position = system.basis().position(&label).ok_or_else(|| {
            AnalyticError::MissingLabel {
                label: label.to_string(),
            }
        })?;
        members.push(label);
        theta.push((top_energy - energy) / HBAR - f64::from(sigma_i) * omega);
        sigma.push(sigma_i);
        positions.push(position);
    }

    let member_of: std::collections::HashMap<usize, usize> = positions
        .iter()
        .enumerate()
        .map(|(m, &p)| (p, m))
        .collect();
    let mut matrix = Array2::<C64>::zeros((dim, dim));
    for (m, &th) in theta.iter().enumerate() {
        matrix[[m, m]] = C64::new(-HBAR * th, 0.0);
    }
    for term in system.terms() {
        let Some(&target) = member_of.get(&term.target) else {
            continue;
        };
        let source = *member_of.get(&term.source).ok_or_else(|| {
            AnalyticError::NotClosed {
                target: members[target].to_string(),
                partner: system.basis().label(term.source).to_string(),
            }
        })?;
        let expected = theta[source] - theta[target];
        if (term.chi - expected).abs() > 1e-9 * (1.0 + term.chi.abs()) {
            return Err(AnalyticError::PhaseMismatch {
                target: members[target].to_string(),
                partner: members[source].to_string(),
                chi: term.chi,
                expected,
            });
        }
        matrix[[target, source]] += term.coeff;
    }

    Ok(XiMatrix {
        matrix,
        members,
        theta,
        sigma,
        base_photons,
        positions,
    })
}

/// Evolve the folded state: X(t) = U·e^{−iΛt/ħ}·U†·X(0).
///
/// The input must be unit norm to 1e-9 unless `auto_normalize` rescales it.
/// Each returned state keeps unit norm to 1e-12.
pub fn propagate(
    xi: &XiMatrix,
    psi0: &[C64],
    times: &[f64],
    auto_normalize: bool,
) -> Result<Vec<Vec<C64>>, AnalyticError> {
    let dim = xi.dim();
    if psi0.len() != dim {
        return Err(AnalyticError::Dimension {
            expected: dim,
            got: psi0.len(),
        });
    }
    let norm: f64 = psi0.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 && !auto_normalize {
        return Err(AnalyticError::NotNormalized { norm });
    }

    let defect = (0..dim)
        .flat_map(|r| (0..dim).map(move |c| (r, c)))
        .map(|(r, c)| (xi.matrix[[r, c]] - xi.matrix[[c, r]].conj()).norm())
        .fold(0.0, f64::max);
    let scale = xi
        .matrix
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    if defect > 1e-12 * scale {
        return Err(AnalyticError::NotHermitian { defect });
    }

    let (eigenvalues, vectors): (Array1<f64>, Array2<C64>) = xi
        .matrix
        .eigh(UPLO::Lower)
        .map_err(|e| AnalyticError::Linalg(e.to_string()))?;

    let mut x0 = Array1::from_vec(psi0.to_vec());
    if auto_normalize {
        let factor = C64::new(1.0 / norm.sqrt(), 0.0);
        x0.mapv_inplace(|a| a * factor);
    }
    let adjoint = vectors.t().mapv(|z| z.conj());
    let coefficients = adjoint.dot(&x0);

    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let rotated = Array1::from_iter(
            coefficients
                .iter()
                .zip(eigenvalues.iter())
                .map(|(c, &e)| c * C64::from_polar(1.0, -e * t / HBAR)),
        );
        let state = vectors.dot(&rotated);
        let state_norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
        debug_assert!(
            (state_norm - 1.0).abs() < 1e-12,
            "fold lost norm: {state_norm}",
        );
        states.push(state.to_vec());
    }
    Ok(states)
}

/// Undo the fold: Φ_i(t) = e^{−iθ̃_i t}·X_i(t).
pub fn map_back(xi: &XiMatrix, times: &[f64], states: &[Vec<C64>]) -> Vec<Vec<C64>> {
    times
        .iter()
        .zip(states)
        .map(|(&t, state)| {
            state
                .iter()
                .zip(&xi.theta)
                .map(|(x, &th)| x * C64::from_polar(1.0, -th * t))
                .collect()
        })
        .collect()
}

/// Propagate an arbitrary initial state by folding each populated ladder.
///
/// Every populated label is assigned to the ladder whose total excitation it
/// carries; the blocks evolve independently and everything outside them stays
/// exactly zero. The sample grid matches the numeric integrators, so outputs
/// are directly comparable.
pub fn analytic_trajectory(
    system: &RabiSystem,
    spec: &IntegratorSpec,
    initial: &[C64],
) -> Result<Trajectory, AnalyticError> {
    let basis = system.basis();
    if initial.len() != basis.len() {
        return Err(AnalyticError::Dimension {
            expected: basis.len(),
            got: initial.len(),
        });
    }
    let times = sample_times(spec).map_err(|e| AnalyticError::Linalg(e.to_string()))?;

    let level_counts = basis.level_counts();
    let exc_max: u32 = level_counts.iter().map(|&b| u32::from(b) - 1).sum();
    let mut bases: Vec<u32> = Vec::new();
    for (index, amp) in initial.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let label = basis.label(index);
        let total = label.photon_sum() + label.dot_excitation();
        if total < exc_max {
            return Err(AnalyticError::BelowLadder {
                label: label.to_string(),
            });
        }
        let base = total - exc_max;
        if !bases.contains(&base) {
            bases.push(base);
        }
    }
    bases.sort_unstable();

    let mut states = vec![vec![C64::ZERO; basis.len()]; times.len()];
    for base in bases {
        let xi = build_xi(system, base)?;
        let mut block0: Vec<C64> = xi.positions.iter().map(|&p| initial[p]).collect();
        let block_norm: f64 = block0.iter().map(|a| a.norm_sqr()).sum();
        let scale = block_norm.sqrt();
        for amp in &mut block0 {
            *amp /= scale;
        }
        let folded = propagate(&xi, &block0, &times, false)?;
        let unfolded = map_back(&xi, &times, &folded);
        for (row, state) in unfolded.iter().enumerate() {
            for (member, &amp) in state.iter().enumerate() {
                states[row][xi.positions[member]] = amp * scale;
            }
        }
    }

    let norms: Vec<f64> = states
        .iter()
        .map(|state| state.iter().map(|a| a.norm_sqr()).sum())
        .collect();
    let initial_norm = norms[0];
    let max_norm_drift = norms
        .iter()
        .map(|n| (n - initial_norm).abs())
        .fold(0.0, f64::max);
    Ok(Trajectory {
        times,
        terminal_norm: *norms.last().expect("at least one sample"),
        states,
        norms,
        max_norm_drift,
        leakage: system.leakage(),
    })
}
