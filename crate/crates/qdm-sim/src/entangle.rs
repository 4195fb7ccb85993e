//! Concurrence diagnostics for the two-dot, two-mode system and spectrum
//! post-processing.

use std::collections::BTreeMap;
use std::io;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::basis::{BasisLabel, BasisSet};
use crate::model::Validated;
use crate::numeric::{integrate, IntegratorSpec, NumericError};
use crate::rabi::{build_rabi_system, dependency_closure, restrict_system};

/// The four amplitude families of a pair of two-level dots sharing two
/// modes, keyed by the photon pair (n1, n2).
///
/// `a` holds both dots excited, `b` only the first, `c` only the second,
/// `d` neither. Keys absent from a map read as zero amplitude.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AmplitudeQuadruple {
    pub a: BTreeMap<(u32, u32), C64>,
    pub b: BTreeMap<(u32, u32), C64>,
    pub c: BTreeMap<(u32, u32), C64>,
    pub d: BTreeMap<(u32, u32), C64>,
}

impl AmplitudeQuadruple {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(map: &BTreeMap<(u32, u32), C64>, key: (u32, u32)) -> C64 {
        map.get(&key).copied().unwrap_or(C64::ZERO)
    }

    pub fn amp_a(&self, key: (u32, u32)) -> C64 {
        Self::get(&self.a, key)
    }

    pub fn amp_b(&self, key: (u32, u32)) -> C64 {
        Self::get(&self.b, key)
    }

    pub fn amp_c(&self, key: (u32, u32)) -> C64 {
        Self::get(&self.c, key)
    }

    pub fn amp_d(&self, key: (u32, u32)) -> C64 {
        Self::get(&self.d, key)
    }

    /// Σ(|a|²+|b|²+|c|²+|d|²); 1 within 1e-8 for a single physical state.
    pub fn total_weight(&self) -> f64 {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .flat_map(|m| m.values())
            .map(|v| v.norm_sqr())
            .sum()
    }

    /// Largest photon index retained in either slot, if any key exists.
    pub fn retained_bounds(&self) -> Option<(u32, u32)> {
        let mut bounds: Option<(u32, u32)> = None;
        for map in [&self.a, &self.b, &self.c, &self.d] {
            for &(n1, n2) in map.keys() {
                bounds = Some(match bounds {
                    None => (n1, n2),
                    Some((b1, b2)) => (b1.max(n1), b2.max(n2)),
                });
            }
        }
        bounds
    }

    /// Fold another quadruple in. Keys may not collide.
    pub fn merge(&mut self, other: &AmplitudeQuadruple) {
        for (mine, theirs) in [
            (&mut self.a, &other.a),
            (&mut self.b, &other.b),
            (&mut self.c, &other.c),
            (&mut self.d, &other.d),
        ] {
            for (&key, &amp) in theirs {
                let previous = mine.insert(key, amp);
                debug_assert!(previous.is_none(), "photon key {key:?} collided");
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum EntangleError {
    #[error("concurrence needs exactly 2 two-level dots and 2 modes, got {dots} dots with levels {levels:?} and {modes} modes")]
    NotTwoQubit {
        dots: usize,
        levels: Vec<u8>,
        modes: usize,
    },
    #[error("state has length {got}, basis has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("shell range needs N_max at least 2, got {n_max}")]
    BadShellRange { n_max: u32 },
    #[error("shells up to {n_max} need excitation cap {needed}, cap is {cap}")]
    CapTooSmall { n_max: u32, needed: u32, cap: u32 },
    #[error("initial label {label} is outside the basis")]
    MissingInitial { label: String },
    #[error("series is empty")]
    EmptySeries,
    #[error("sample step must be positive and finite, got {dt}")]
    BadSampleStep { dt: f64 },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn check_two_qubit_shape(basis: &BasisSet) -> Result<(), EntangleError> {
    let levels = basis.level_counts();
    if levels != [2, 2] || basis.mode_count() != 2 {
        return Err(EntangleError::NotTwoQubit {
            dots: levels.len(),
            levels: levels.to_vec(),
            modes: basis.mode_count(),
        });
    }
    Ok(())
}

/// Sort a state vector into the four amplitude families.
///
/// Zero amplitudes are dropped, so the retained keys are exactly the
/// populated photon pairs.
pub fn from_state(
    basis: &BasisSet,
    state: &[C64],
) -> Result<AmplitudeQuadruple, EntangleError> {
    check_two_qubit_shape(basis)?;
    if state.len() != basis.len() {
        return Err(EntangleError::Dimension {
            expected: basis.len(),
            got: state.len(),
        });
    }
    let mut quadruple = AmplitudeQuadruple::new();
    for (label, &amp) in basis.labels().iter().zip(state) {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let key = (label.photons[0], label.photons[1]);
        let map = match (label.levels[0], label.levels[1]) {
            (1, 1) => &mut quadruple.a,
            (1, 0) => &mut quadruple.b,
            (0, 1) => &mut quadruple.c,
            (0, 0) => &mut quadruple.d,
            other => unreachable!("two-level dots cannot reach {other:?}"),
        };
        map.insert(key, amp);
    }
    Ok(quadruple)
}

/// The generalized concurrence over photon indices up to the given bounds.
///
/// λ = sqrt( Σ_{n,m} |a(n)d(m) − b(n)c(m) − b(m)c(n) + a(m)d(n)|² ) with
/// n = (n1, n2) and m = (m1, m2) running over 0..=n1_max × 0..=n2_max,
/// so the vacuum index participates alongside every populated pair.
/// Absent keys read as zero, λ is never negative, and no upper clamp is
/// applied.
pub fn concurrence(q: &AmplitudeQuadruple, n1_max: u32, n2_max: u32) -> f64 {
    let keys: Vec<(u32, u32)> = (0..=n1_max)
        .flat_map(|n1| (0..=n2_max).map(move |n2| (n1, n2)))
        .collect();
    let mut total = 0.0;
    for &n in &keys {
        for &m in &keys {
            let bracket = q.amp_a(n) * q.amp_d(m) - q.amp_b(n) * q.amp_c(m)
                - q.amp_b(m) * q.amp_c(n)
                + q.amp_a(m) * q.amp_d(n);
            total += bracket.norm_sqr();
        }
    }
    total.sqrt()
}

/// Concurrence over every photon index the quadruple retains.
pub fn concurrence_retained(q: &AmplitudeQuadruple) -> f64 {
    match q.retained_bounds() {
        Some((n1, n2)) => concurrence(q, n1, n2),
        None => 0.0,
    }
}

/// λ(t) samples from a multi-shell run.
#[derive(Clone, Debug)]
pub struct ConcurrenceSeries {
    pub times: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Worst norm drift any shell accumulated.
    pub max_norm_drift: f64,
}

/// Evolve every photon shell N_sum = 2..=N_max and track the combined λ(t).
///
/// Each shell starts with amplitude 1 on the doubly excited dot vector at
/// photons (1, N_sum − 1), is restricted to its dependency closure, and is
/// integrated on the shared sample grid. Shells are independent, so up to
/// `jobs` of them run on parallel threads; their unit-norm states are merged
/// into one quadruple per sample before evaluating λ over all retained
/// photon indices.
pub fn concurrence_run(
    config: &Validated,
    basis: &BasisSet,
    spec: &IntegratorSpec,
    n_max: u32,
    jobs: usize,
) -> Result<ConcurrenceSeries, EntangleError> {
    check_two_qubit_shape(basis)?;
    if n_max < 2 {
        return Err(EntangleError::BadShellRange { n_max });
    }
    let needed = n_max + 2;
    if basis.excitation_cap() < needed {
        return Err(EntangleError::CapTooSmall {
            n_max,
            needed,
            cap: basis.excitation_cap(),
        });
    }

    let system = build_rabi_system(config, basis);
    let shells: Vec<u32> = (2..=n_max).collect();
    let jobs = jobs.max(1);

    let mut shell_quadruples: Vec<Option<Vec<AmplitudeQuadruple>>> =
        vec![None; shells.len()];
    let mut times: Vec<f64> = Vec::new();
    let mut max_norm_drift = 0.0f64;
    for (chunk_start, chunk) in shells
        .chunks(jobs)
        .enumerate()
        .map(|(c, chunk)| (c * jobs, chunk))
    {
        let mut results: Vec<ShellOutcome> = Vec::with_capacity(chunk.len());
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&n_sum| {
                    let system = &system;
                    scope.spawn(move || run_shell(system, spec, n_sum))
                })
                .collect();
            for handle in handles {
                results.push(handle.join().expect("shell worker not to panic"));
            }
        });
        for (offset, result) in results.into_iter().enumerate() {
            let (shell_times, quadruples, drift) = result?;
            if times.is_empty() {
                times = shell_times;
            } else {
                debug_assert_eq!(times, shell_times, "shells share one grid");
            }
            max_norm_drift = max_norm_drift.max(drift);
            shell_quadruples[chunk_start + offset] = Some(quadruples);
        }
    }

    let mut lambda = Vec::with_capacity(times.len());
    for row in 0..times.len() {
        let mut combined = AmplitudeQuadruple::new();
        for quadruples in shell_quadruples.iter().flatten() {
            combined.merge(&quadruples[row]);
        }
        lambda.push(concurrence_retained(&combined));
    }
    Ok(ConcurrenceSeries {
        times,
        lambda,
        max_norm_drift,
    })
}

type ShellOutcome = Result<(Vec<f64>, Vec<AmplitudeQuadruple>, f64), EntangleError>;

fn run_shell(
    system: &crate::rabi::RabiSystem,
    spec: &IntegratorSpec,
    n_sum: u32,
) -> ShellOutcome {
    let label = BasisLabel::new(vec![1, 1], vec![1, n_sum - 1]);
    let start = system.basis().position(&label).ok_or_else(|| {
        EntangleError::MissingInitial {
            label: label.to_string(),
        }
    })?;
    let closure = dependency_closure(system, start);
    let shell = restrict_system(system, &closure);
    let mut initial = vec![C64::ZERO; shell.dim()];
    let at = shell
        .basis()
        .position(&label)
        .expect("closure keeps its seed");
    initial[at] = C64::ONE;
    let trajectory = integrate(&shell, spec, &initial)?;
    let quadruples = trajectory
        .states
        .iter()
        .map(|state| from_state(shell.basis(), state))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((trajectory.times, quadruples, trajectory.max_norm_drift))
}

/// Discrete Fourier magnitude spectrum of a uniformly sampled series.
///
/// Returns (frequency in Hz, |X_k|/n) pairs sorted by signed frequency,
/// with bins above the Nyquist index folded to negative frequencies.
pub fn dft_spectrum(series: &[C64], dt: f64) -> Result<Vec<(f64, f64)>, EntangleError> {
    if series.is_empty() {
        return Err(EntangleError::EmptySeries);
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(EntangleError::BadSampleStep { dt });
    }
    let n = series.len();
    let mut buffer = series.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let span = n as f64 * dt;
    let mut spectrum: Vec<(f64, f64)> = buffer
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let signed = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            (signed / span, x.norm() / n as f64)
        })
        .collect();
    spectrum.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(spectrum)
}

/// Write λ(t) as CSV with header `t,lambda`.
pub fn write_lambda_csv<W: io::Write>(
    series: &ConcurrenceSeries,
    out: W,
) -> Result<(), EntangleError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["t", "lambda"])?;
    for (t, l) in series.times.iter().zip(&series.lambda) {
        writer.write_record([format!("{t}"), format!("{l}")])?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a spectrum as CSV with header `freq_hz,magnitude`.
pub fn write_spectrum_csv<W: io::Write>(
    spectrum: &[(f64, f64)],
    out: W,
) -> Result<(), EntangleError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["freq_hz", "magnitude"])?;
    for (f, m) in spectrum {
        writer.write_record([format!("{f}"), format!("{m}")])?;
    }
    writer.flush()?;
    Ok(())
}
