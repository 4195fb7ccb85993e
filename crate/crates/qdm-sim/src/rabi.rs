//! Compilation of the coupled amplitude equations, their right-hand side,
//! and a brute-force interaction-picture Hamiltonian used as an oracle.

use std::collections::BTreeSet;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::basis::{BasisLabel, BasisSet};
use crate::model::{Validated, HBAR};

/// One coupling term: amplitude `source` drives amplitude `target` through
/// iħ·dΦ_target/dt += coeff · e^{iχt} · Φ_source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingTerm {
    pub target: usize,
    pub source: usize,
    /// Complex weight in rad/s, including the photon √ factor.
    pub coeff: C64,
    /// Phase slope χ in rad/s.
    pub chi: f64,
}

/// Couplings dropped at the photon cap.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Leakage {
    pub count: usize,
    /// Sum of |coeff| over dropped terms (rad/s).
    pub weight: f64,
}

/// The compiled equation system over a truncated basis.
#[derive(Clone, Debug)]
pub struct RabiSystem {
    config: Validated,
    basis: BasisSet,
    terms: Vec<CouplingTerm>,
    leakage: Leakage,
}

impl RabiSystem {
    pub fn config(&self) -> &Validated {
        &self.config
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn terms(&self) -> &[CouplingTerm] {
        &self.terms
    }

    pub fn leakage(&self) -> Leakage {
        self.leakage
    }

    pub fn rwa(&self) -> bool {
        self.config.rwa()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RabiError {
    #[error("amplitude vector has length {got}, basis has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("oracle matrix dimension {dim} exceeds the limit {max}")]
    OracleTooLarge { dim: usize, max: usize },
    #[error("label {label} is not in the basis")]
    LabelMissing { label: String },
}

fn with_level(label: &BasisLabel, dot: usize, level: u8) -> BasisLabel {
    let mut levels = label.levels.clone();
    levels[dot] = level;
    BasisLabel::new(levels, label.photons.clone())
}

fn with_two_levels(
    label: &BasisLabel,
    dot_a: usize,
    level_a: u8,
    dot_b: usize,
    level_b: u8,
) -> BasisLabel {
    let mut levels = label.levels.clone();
    levels[dot_a] = level_a;
    levels[dot_b] = level_b;
    BasisLabel::new(levels, label.photons.clone())
}

fn with_photon_delta(label: &BasisLabel, mode: usize, delta: i64) -> Option<BasisLabel> {
    let current = i64::from(label.photons[mode]);
    let next = current + delta;
    if next < 0 {
        return None;
    }
    let mut photons = label.photons.clone();
    photons[mode] = next as u32;
    Some(BasisLabel::new(label.levels.clone(), photons))
}

/// Compile every coupling term for every basis label.
///
/// Per target (A, F), each field coupling (n, i < j, ν) contributes the
/// energy-conserving pair
///
/// - dot n at j: source (A_{j→i}, f_ν + 1), coeff γ̄·g·√(f_ν+1), χ = ω_ji − Ω_ν,
/// - dot n at i: source (A_{i→j}, f_ν − 1), coeff γ·ḡ·√f_ν,     χ = Ω_ν − ω_ji,
///
/// and, when `rwa` is off, the counter-rotating pair with phases ∓(ω_ji + Ω_ν).
/// Each dipole coupling pair (n < m) contributes the two mixed terms that move
/// the dots in opposite directions (kept under RWA) and, without RWA, the two
/// that move them together. Terms whose partner exceeds the photon cap are
/// dropped and tallied as leakage; a √0 annihilation partner is simply absent.
pub fn build_rabi_system(config: &Validated, basis: &BasisSet) -> RabiSystem {
    let rwa = config.rwa();
    let couplings = config.couplings();
    let mut terms = Vec::new();
    let mut leakage = Leakage::default();

    let mut push = |terms: &mut Vec<CouplingTerm>,
                    target: usize,
                    source: Option<usize>,
                    coeff: C64,
                    chi: f64| {
        if coeff.norm_sqr() == 0.0 {
            return;
        }
        match source {
            Some(source) => terms.push(CouplingTerm {
                target,
                source,
                coeff,
                chi,
            }),
            None => {
                leakage.count += 1;
                leakage.weight += coeff.norm();
            }
        }
    };

    for (target_index, label) in basis.labels().iter().enumerate() {
        for (&(n, i, j, nu), &g) in couplings.iter_g() {
            let gamma = couplings.gamma(n, i, j);
            let omega_ji = (config.level(n, j) - config.level(n, i)) / HBAR;
            let big_omega = config.mode_frequency(nu);
            let f = label.photons[nu];
            let at = label.levels[n];

            if at == j as u8 {
                // photon absorbed on the way up
                let up = with_photon_delta(label, nu, 1).and_then(|l| {
                    basis.position(&with_level(&l, n, i as u8))
                });
                push(
                    &mut terms,
                    target_index,
                    up,
                    gamma.conj() * g * f64::sqrt(f as f64 + 1.0),
                    omega_ji - big_omega,
                );
                if !rwa && f > 0 {
                    let down = with_photon_delta(label, nu, -1)
                        .and_then(|l| basis.position(&with_level(&l, n, i as u8)));
                    push(
                        &mut terms,
                        target_index,
                        down,
                        gamma.conj() * g.conj() * f64::sqrt(f as f64),
                        omega_ji + big_omega,
                    );
                }
            }
            if at == i as u8 {
                // photon emitted on the way down
                if f > 0 {
                    let down = with_photon_delta(label, nu, -1)
                        .and_then(|l| basis.position(&with_level(&l, n, j as u8)));
                    push(
                        &mut terms,
                        target_index,
                        down,
                        gamma * g.conj() * f64::sqrt(f as f64),
                        big_omega - omega_ji,
                    );
                }
                if !rwa {
                    let up = with_photon_delta(label, nu, 1)
                        .and_then(|l| basis.position(&with_level(&l, n, j as u8)));
                    push(
                        &mut terms,
                        target_index,
                        up,
                        gamma * g * f64::sqrt(f as f64 + 1.0),
                        -omega_ji - big_omega,
                    );
                }
            }
        }

        for (&(n, i, j), &eta_n) in couplings.iter_eta() {
            for (&(m, p, q), &eta_m) in couplings.iter_eta() {
                if m <= n {
                    continue;
                }
                let omega_n = (config.level(n, j) - config.level(n, i)) / HBAR;
                let omega_m = (config.level(m, q) - config.level(m, p)) / HBAR;
                let (ln, lm) = (label.levels[n], label.levels[m]);

                if ln == i as u8 && lm == q as u8 {
                    let source =
                        basis.position(&with_two_levels(label, n, j as u8, m, p as u8));
                    push(
                        &mut terms,
                        target_index,
                        source,
                        eta_n * eta_m.conj(),
                        -omega_n + omega_m,
                    );
                }
                if ln == j as u8 && lm == p as u8 {
                    let source =
                        basis.position(&with_two_levels(label, n, i as u8, m, q as u8));
                    push(
                        &mut terms,
                        target_index,
                        source,
                        eta_n.conj() * eta_m,
                        omega_n - omega_m,
                    );
                }
                if !rwa {
                    if ln == i as u8 && lm == p as u8 {
                        let source = basis
                            .position(&with_two_levels(label, n, j as u8, m, q as u8));
                        push(
                            &mut terms,
                            target_index,
                            source,
                            eta_n * eta_m,
                            -omega_n - omega_m,
                        );
                    }
                    if ln == j as u8 && lm == q as u8 {
                        let source = basis
                            .position(&with_two_levels(label, n, i as u8, m, p as u8));
                        push(
                            &mut terms,
                            target_index,
                            source,
                            eta_n.conj() * eta_m.conj(),
                            omega_n + omega_m,
                        );
                    }
                }
            }
        }
    }

    RabiSystem {
        config: config.clone(),
        basis: basis.clone(),
        terms,
        leakage,
    }
}

/// Evaluate dΦ/dt = (−i/ħ) Σ coeff·e^{iχt}·Φ_source into `out`.
pub fn rhs(
    system: &RabiSystem,
    t: f64,
    phi: &[C64],
    out: &mut [C64],
) -> Result<(), RabiError> {
    let dim = system.dim();
    for len in [phi.len(), out.len()] {
        if len != dim {
            return Err(RabiError::DimensionMismatch {
                expected: dim,
                got: len,
            });
        }
    }
    out.fill(C64::ZERO);
    let minus_i_over_hbar = C64::new(0.0, -1.0 / HBAR);
    for term in &system.terms {
        let phase = C64::from_polar(1.0, term.chi * t);
        out[term.target] += minus_i_over_hbar * term.coeff * phase * phi[term.source];
    }
    Ok(())
}

/// Zero-point-free energy of a basis label under the uncoupled Hamiltonian.
fn bare_energy(config: &Validated, label: &BasisLabel) -> f64 {
    let dots: f64 = label
        .levels
        .iter()
        .enumerate()
        .map(|(n, &r)| config.level(n, usize::from(r)))
        .sum();
    let field: f64 = label
        .photons
        .iter()
        .enumerate()
        .map(|(nu, &f)| f64::from(f) * config.mode_frequency(nu))
        .sum();
    dots + field
}

/// Dense interaction-picture Hamiltonian built directly from the operator
/// definitions, for cross-checking the compiled term list.
///
/// The static interaction matrix is assembled by applying each raising or
/// lowering product to every basis ket, then every element picks up the bare
/// phase e^{i(E_row − E_col)t/ħ}. The RWA filter drops operator classes
/// (raise⊗create, lower⊗annihilate, and the aligned dipole products), not
/// individual phases, so the construction shares nothing with
/// [`build_rabi_system`] beyond the coupling tables.
pub fn image_hamiltonian_matrix(
    config: &Validated,
    basis: &BasisSet,
    t: f64,
    rwa: bool,
    max_dim: usize,
) -> Result<Array2<C64>, RabiError> {
    let dim = basis.len();
    if dim > max_dim {
        return Err(RabiError::OracleTooLarge { dim, max: max_dim });
    }
    let couplings = config.couplings();
    let mut h = Array2::<C64>::zeros((dim, dim));
    let add = |h: &mut Array2<C64>, row: Option<usize>, col: usize, amp: C64| {
        if let Some(row) = row {
            h[[row, col]] += amp;
        }
    };

    for (col, ket) in basis.labels().iter().enumerate() {
        for (&(n, i, j, nu), &g) in couplings.iter_g() {
            let gamma = couplings.gamma(n, i, j);
            let f = ket.photons[nu];
            let (i8v, j8v) = (i as u8, j as u8);

            // raise the dot
            if ket.levels[n] == i8v {
                if f > 0 {
                    let row = with_photon_delta(ket, nu, -1)
                        .and_then(|l| basis.position(&with_level(&l, n, j8v)));
                    add(&mut h, row, col, gamma.conj() * g * f64::sqrt(f as f64));
                }
                if !rwa {
                    let row = with_photon_delta(ket, nu, 1)
                        .and_then(|l| basis.position(&with_level(&l, n, j8v)));
                    add(
                        &mut h,
                        row,
                        col,
                        gamma.conj() * g.conj() * f64::sqrt(f as f64 + 1.0),
                    );
                }
            }
            // lower the dot
            if ket.levels[n] == j8v {
                let row = with_photon_delta(ket, nu, 1)
                    .and_then(|l| basis.position(&with_level(&l, n, i8v)));
                add(
                    &mut h,
                    row,
                    col,
                    gamma * g.conj() * f64::sqrt(f as f64 + 1.0),
                );
                if !rwa && f > 0 {
                    let row = with_photon_delta(ket, nu, -1)
                        .and_then(|l| basis.position(&with_level(&l, n, i8v)));
                    add(&mut h, row, col, gamma * g * f64::sqrt(f as f64));
                }
            }
        }

        for (&(n, i, j), &eta_n) in couplings.iter_eta() {
            for (&(m, p, q), &eta_m) in couplings.iter_eta() {
                if m <= n {
                    continue;
                }
                let (i8v, j8v) = (i as u8, j as u8);
                let (p8v, q8v) = (p as u8, q as u8);
                // opposite-direction products survive the RWA
                if ket.levels[n] == j8v && ket.levels[m] == p8v {
                    let row = basis.position(&with_two_levels(ket, n, i8v, m, q8v));
                    add(&mut h, row, col, eta_n * eta_m.conj());
                }
                if ket.levels[n] == i8v && ket.levels[m] == q8v {
                    let row = basis.position(&with_two_levels(ket, n, j8v, m, p8v));
                    add(&mut h, row, col, eta_n.conj() * eta_m);
                }
                if !rwa {
                    if ket.levels[n] == j8v && ket.levels[m] == q8v {
                        let row = basis.position(&with_two_levels(ket, n, i8v, m, p8v));
                        add(&mut h, row, col, eta_n * eta_m);
                    }
                    if ket.levels[n] == i8v && ket.levels[m] == p8v {
                        let row = basis.position(&with_two_levels(ket, n, j8v, m, q8v));
                        add(&mut h, row, col, eta_n.conj() * eta_m.conj());
                    }
                }
            }
        }
    }

    for row in 0..dim {
        let e_row = bare_energy(config, basis.label(row));
        for col in 0..dim {
            let e_col = bare_energy(config, basis.label(col));
            let phase = C64::from_polar(1.0, (e_row - e_col) * t / HBAR);
            h[[row, col]] *= phase;
        }
    }
    Ok(h)
}

/// Basis indices whose amplitudes appear on the right-hand side of the
/// target's equation.
pub fn direct_sources(system: &RabiSystem, target: usize) -> BTreeSet<usize> {
    system
        .terms
        .iter()
        .filter(|term| term.target == target)
        .map(|term| term.source)
        .collect()
}

/// The target plus every amplitude it transitively depends on.
pub fn dependency_closure(system: &RabiSystem, target: usize) -> BTreeSet<usize> {
    let mut closure = BTreeSet::new();
    let mut queue = vec![target];
    closure.insert(target);
    while let Some(at) = queue.pop() {
        for source in direct_sources(system, at) {
            if closure.insert(source) {
                queue.push(source);
            }
        }
    }
    closure
}

/// Restrict a system to a subset of its basis, keeping only terms with both
/// endpoints inside. Terms pointing out of the subset are tallied as leakage,
/// so restricting to a dependency closure keeps leakage at zero.
pub fn restrict_system(system: &RabiSystem, keep: &BTreeSet<usize>) -> RabiSystem {
    let labels: Vec<BasisLabel> = keep
        .iter()
        .map(|&i| system.basis.label(i).clone())
        .collect();
    let basis = BasisSet::from_labels(
        labels,
        system.basis.level_counts().to_vec(),
        system.basis.mode_count(),
        system.basis.excitation_cap(),
    );
    let remap: std::collections::HashMap<usize, usize> =
        keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let mut terms = Vec::new();
    let mut leakage = system.leakage;
    for term in &system.terms {
        let Some(&target) = remap.get(&term.target) else {
            continue;
        };
        match remap.get(&term.source) {
            Some(&source) => terms.push(CouplingTerm {
                target,
                source,
                coeff: term.coeff,
                chi: term.chi,
            }),
            None => {
                leakage.count += 1;
                leakage.weight += term.coeff.norm();
            }
        }
    }
    RabiSystem {
        config: system.config.clone(),
        basis,
        terms,
        leakage,
    }
}

/// Serialize the equation system as JSON for external solvers.
pub fn export_terms_json(system: &RabiSystem) -> String {
    let labels: Vec<String> = system
        .basis
        .labels()
        .iter()
        .map(|l| l.to_string())
        .collect();
    let terms: Vec<serde_json::Value> = system
        .terms
        .iter()
        .map(|t| {
            serde_json::json!({
                "target": t.target,
                "source": t.source,
                "coeff_re": t.coeff.re,
                "coeff_im": t.coeff.im,
                "chi": t.chi,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "basis": labels,
        "terms": terms,
        "rwa": system.rwa(),
        "leakage": {
            "count": system.leakage.count,
            "weight": system.leakage.weight,
        },
    });
    serde_json::to_string_pretty(&doc).expect("term table serializes")
}
