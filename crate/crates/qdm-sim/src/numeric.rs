//! Fixed-step time integration of the compiled amplitude equations.

use std::io;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::BasisSet;
use crate::rabi::{rhs, Leakage, RabiError, RabiSystem};

/// How many steps pass between full non-finite scans of the state vector.
const NAN_GUARD_STRIDE: u64 = 10_000;

#[derive(Clone, Copy, Debug, Eq, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Euler,
    Rk4,
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Solver::Euler => write!(f, "euler"),
            Solver::Rk4 => write!(f, "rk4"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub solver: Solver,
    /// Step size in seconds.
    pub dt: f64,
    /// Integration horizon in seconds.
    pub t_end: f64,
    /// Record every n-th step, in addition to the first and last.
    pub output_stride: u64,
}

impl IntegratorSpec {
    pub fn validate(&self) -> Result<(), NumericError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(NumericError::BadStep { dt: self.dt });
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(NumericError::BadHorizon { t_end: self.t_end });
        }
        if self.output_stride == 0 {
            return Err(NumericError::BadStride);
        }
        Ok(())
    }
}

/// Sampled solution of one integration run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Sample times, each exactly n·dt for the recorded step n.
    pub times: Vec<f64>,
    /// Amplitude vectors at the sample times, in basis order.
    pub states: Vec<Vec<C64>>,
    /// Σ|Φ|² at the sample times.
    pub norms: Vec<f64>,
    /// Largest |Σ|Φ|² − initial norm| seen at any step, recorded or not.
    pub max_norm_drift: f64,
    /// Σ|Φ|² after the final step.
    pub terminal_norm: f64,
    /// Cap losses of the generating system, copied through for reporting.
    pub leakage: Leakage,
}

impl Trajectory {
    pub fn terminal_state(&self) -> &[C64] {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn terminal_norm_drift(&self) -> f64 {
        (self.terminal_norm - self.norms[0]).abs()
    }
}

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("step size must be positive and finite, got {dt}")]
    BadStep { dt: f64 },
    #[error("integration horizon must be at least one step, got {t_end}")]
    BadHorizon { t_end: f64 },
    #[error("output stride must be at least 1")]
    BadStride,
    #[error("initial state is not finite")]
    BadInitial,
    #[error("state became non-finite by step {step} (t = {time:.6e} s, norm = {norm})")]
    NonFinite { step: u64, time: f64, norm: f64 },
    #[error(transparent)]
    Rhs(#[from] RabiError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn norm_squared(phi: &[C64]) -> f64 {
    phi.iter().map(|a| a.norm_sqr()).sum()
}

/// The times a run with this spec records: step 0, every stride-th step,
/// and the final step.
pub fn sample_times(spec: &IntegratorSpec) -> Result<Vec<f64>, NumericError> {
    spec.validate()?;
    let n_steps = ((spec.t_end / spec.dt) + 1e-9).floor() as u64;
    let mut times = vec![0.0];
    for n in 1..=n_steps {
        if n % spec.output_stride == 0 || n == n_steps {
            times.push(n as f64 * spec.dt);
        }
    }
    Ok(times)
}

fn all_finite(phi: &[C64]) -> bool {
    phi.iter().all(|a| a.re.is_finite() && a.im.is_finite())
}

/// Integrate dΦ/dt from `initial` over the spec's horizon.
///
/// Times are always n·dt, never accumulated sums, and the right-hand side is
/// evaluated in stored term order, so repeated runs are bit-identical. The
/// state is scanned for non-finite components every 10⁴ steps and after the
/// last step; the norm is tracked every step and a non-finite norm aborts
/// immediately with the offending step index.
pub fn integrate(
    system: &RabiSystem,
    spec: &IntegratorSpec,
    initial: &[C64],
) -> Result<Trajectory, NumericError> {
    spec.validate()?;
    if initial.len() != system.dim() {
        return Err(NumericError::Rhs(RabiError::DimensionMismatch {
            expected: system.dim(),
            got: initial.len(),
        }));
    }
    if !all_finite(initial) {
        return Err(NumericError::BadInitial);
    }

    let dim = system.dim();
    let dt = spec.dt;
    let n_steps = ((spec.t_end / dt) + 1e-9).floor() as u64;
    let mut phi = initial.to_vec();
    let mut k1 = vec![C64::ZERO; dim];
    let mut k2 = vec![C64::ZERO; dim];
    let mut k3 = vec![C64::ZERO; dim];
    let mut k4 = vec![C64::ZERO; dim];
    let mut stage = vec![C64::ZERO; dim];

    let initial_norm = norm_squared(&phi);
    let mut trajectory = Trajectory {
        times: vec![0.0],
        states: vec![phi.clone()],
        norms: vec![initial_norm],
        max_norm_drift: 0.0,
        terminal_norm: initial_norm,
        leakage: system.leakage(),
    };

    for n in 0..n_steps {
        let t = n as f64 * dt;
        match spec.solver {
            Solver::Euler => {
                rhs(system, t, &phi, &mut k1)?;
                for i in 0..dim {
                    phi[i] += dt * k1[i];
                }
            }
            Solver::Rk4 => {
                rhs(system, t, &phi, &mut k1)?;
                for i in 0..dim {
                    stage[i] = phi[i] + 0.5 * dt * k1[i];
                }
                rhs(system, t + 0.5 * dt, &stage, &mut k2)?;
                for i in 0..dim {
                    stage[i] = phi[i] + 0.5 * dt * k2[i];
                }
                rhs(system, t + 0.5 * dt, &stage, &mut k3)?;
                for i in 0..dim {
                    stage[i] = phi[i] + dt * k3[i];
                }
                rhs(system, t + dt, &stage, &mut k4)?;
                for i in 0..dim {
                    phi[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }

        let done = n + 1;
        let time = done as f64 * dt;
        let norm = norm_squared(&phi);
        if !norm.is_finite() {
            return Err(NumericError::NonFinite {
                step: done,
                time,
                norm,
            });
        }
        trajectory.max_norm_drift = trajectory.max_norm_drift.max((norm - initial_norm).abs());
        if (done % NAN_GUARD_STRIDE == 0 || done == n_steps) && !all_finite(&phi) {
            return Err(NumericError::NonFinite {
                step: done,
                time,
                norm,
            });
        }
        if done % spec.output_stride == 0 || done == n_steps {
            trajectory.times.push(time);
            trajectory.states.push(phi.clone());
            trajectory.norms.push(norm);
        }
        trajectory.terminal_norm = norm;
    }

    Ok(trajectory)
}

/// Write a trajectory as CSV with one column group per basis label.
///
/// Header: `t,<label>_re,<label>_im,<label>_abs,norm`. Floats use the
/// shortest round-trip formatting, so the output is byte-stable.
pub fn write_csv<W: io::Write>(
    trajectory: &Trajectory,
    basis: &BasisSet,
    out: W,
) -> Result<(), NumericError> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for label in basis.labels() {
        header.push(format!("{label}_re"));
        header.push(format!("{label}_im"));
        header.push(format!("{label}_abs"));
    }
    header.push("norm".to_string());
    writer.write_record(&header)?;

    for (row, t) in trajectory.times.iter().enumerate() {
        let mut record = vec![format!("{t}")];
        for amp in &trajectory.states[row] {
            record.push(format!("{}", amp.re));
            record.push(format!("{}", amp.im));
            record.push(format!("{}", amp.norm()));
        }
        record.push(format!("{}", trajectory.norms[row]));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, BasisLabel};
    use crate::model::{
        validate, CouplingSet, DotSpec, ModeSpec, SystemConfig, Units, Validated,
    };
    use crate::rabi::build_rabi_system;

    fn resonant_pair(g: f64, cap: u32) -> Validated {
        let omega = 2.5e14;
        let mut couplings = CouplingSet::new();
        couplings.set_gamma(0, 0, 1, C64::ONE);
        couplings.set_g(0, 0, 1, 0, C64::new(g, 0.0));
        validate(SystemConfig {
            dots: vec![DotSpec { levels: vec![0.0, omega] }],
            modes: vec![ModeSpec { frequency: omega }],
            couplings,
            units: Units::RadPerSec,
            rwa: true,
            excitation_cap: cap,
        })
        .unwrap()
    }

    fn excited_vacuum(system: &crate::rabi::RabiSystem) -> Vec<C64> {
        let mut phi = vec![C64::ZERO; system.dim()];
        let at = system
            .basis()
            .position(&BasisLabel::new(vec![1], vec![0]))
            .unwrap();
        phi[at] = C64::ONE;
        phi
    }

    #[test]
    fn spec_validation_rejects_bad_parameters() {
        let good = IntegratorSpec {
            solver: Solver::Rk4,
            dt: 1e-16,
            t_end: 1e-13,
            output_stride: 1,
        };
        assert!(good.validate().is_ok());
        assert!(matches!(
            IntegratorSpec { dt: 0.0, ..good }.validate(),
            Err(NumericError::BadStep { .. })
        ));
        assert!(matches!(
            IntegratorSpec { dt: -1e-16, ..good }.validate(),
            Err(NumericError::BadStep { .. })
        ));
        assert!(matches!(
            IntegratorSpec { t_end: 5e-17, ..good }.validate(),
            Err(NumericError::BadHorizon { .. })
        ));
        assert!(matches!(
            IntegratorSpec { output_stride: 0, ..good }.validate(),
            Err(NumericError::BadStride)
        ));
    }

    #[test]
    fn rk4_follows_the_vacuum_oscillation() {
        let g = 2.0e12;
        let config = resonant_pair(g, 1);
        let basis = build_basis(&config);
        let system = build_rabi_system(&config, &basis);
        let spec = IntegratorSpec {
            solver: Solver::Rk4,
            dt: 1e-16,
            t_end: 2e-12,
            output_stride: 100,
        };
        let trajectory = integrate(&system, &spec, &excited_vacuum(&system)).unwrap();
        let upper = basis
            .position(&BasisLabel::new(vec![1], vec![0]))
            .unwrap();
        for (row, t) in trajectory.times.iter().enumerate() {
            let expect = (g * t).cos().powi(2);
            let got = trajectory.states[row][upper].norm_sqr();
            assert!(
                (got - expect).abs() < 1e-9,
                "t = {t}: population {got} vs {expect}",
            );
        }
        assert!(trajectory.max_norm_drift < 1e-10);
    }

    #[test]
    fn halving_the_euler_step_halves_the_terminal_drift() {
        let config = resonant_pair(2.0e12, 1);
        let basis = build_basis(&config);
        let system = build_rabi_system(&config, &basis);
        let spec = |dt: f64| IntegratorSpec {
            solver: Solver::Euler,
            dt,
            t_end: 1e-13,
            output_stride: 1_000_000,
        };
        let coarse = integrate(&system, &spec(1e-16), &excited_vacuum(&system))
            .unwrap()
            .terminal_norm_drift();
        let fine = integrate(&system, &spec(5e-17), &excited_vacuum(&system))
            .unwrap()
            .terminal_norm_drift();
        let ratio = coarse / fine;
        assert!(
            (1.7..=2.3).contains(&ratio),
            "drift ratio {ratio} outside [1.7, 2.3]",
        );
    }

    #[test]
    fn recording_includes_first_stride_and_final_steps() {
        let config = resonant_pair(2.0e12, 1);
        let basis = build_basis(&config);
        let system = build_rabi_system(&config, &basis);
        let dt = 1e-16;
        let spec = IntegratorSpec {
            solver: Solver::Rk4,
            dt,
            t_end: 10.0 * dt,
            output_stride: 3,
        };
        let trajectory = integrate(&system, &spec, &excited_vacuum(&system)).unwrap();
        let expect: Vec<f64> = [0.0, 3.0, 6.0, 9.0, 10.0]
            .iter()
            .map(|n| n * dt)
            .collect();
        assert_eq!(trajectory.times, expect);
        assert_eq!(trajectory.states.len(), expect.len());
        assert_eq!(trajectory.norms.len(), expect.len());
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let config = resonant_pair(2.0e12, 2);
        let basis = build_basis(&config);
        let system = build_rabi_system(&config, &basis);
        let spec = IntegratorSpec {
            solver: Solver::Rk4,
            dt: 2e-16,
            t_end: 1e-13,
            output_stride: 7,
        };
        let a = integrate(&system, &spec, &excited_vacuum(&system)).unwrap();
        let b = integrate(&system, &spec, &excited_vacuum(&system)).unwrap();
        for (x, y) in a.states.iter().flatten().zip(b.states.iter().flatten()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_csv(&a, &basis, &mut csv_a).unwrap();
        write_csv(&b, &basis, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn runaway_euler_steps_trip_the_guard() {
        let config = resonant_pair(2.0e12, 1);
        let basis = build_basis(&config);
        let system = build_rabi_system(&config, &basis);
        // dt·g = 3 grows the norm by an order of magnitude per step
        let spec = IntegratorSpec {
            solver: Solver::Euler,
            dt: 1.5e-12,
            t_end: 3e-8,
            output_stride: 1_000_000,
        };
        let err = integrate(&system, &spec, &excited_vacuum(&system)).unwrap_err();
        match err {
            NumericError::NonFinite { step, .. } => assert!(step <= 20_000),
            other => panic!("expected a non-finite abort, got {other}"),
        }
    }

    #[test]
    fn non_finite_initial_states_are_rejected() {
        let config = resonant_pair(2.0e12, 1);
        let basis = build_basis(&config);
        let system = build_rabi_system(&config, &basis);
        let mut phi = excited_vacuum(&system);
        phi[0] = C64::new(f64::NAN, 0.0);
        let spec = IntegratorSpec {
            solver: Solver::Rk4,
            dt: 1e-16,
            t_end: 1e-15,
            output_stride: 1,
        };
        assert!(matches!(
            integrate(&system, &spec, &phi),
            Err(NumericError::BadInitial)
        ));
    }

    #[test]
    fn csv_layout_matches_the_basis() {
        let config = resonant_pair(2.0e12, 1);
        let basis = build_basis(&config);
        let system = build_rabi_system(&config, &basis);
        let spec = IntegratorSpec {
            solver: Solver::Rk4,
            dt: 1e-16,
            t_end: 5e-16,
            output_stride: 1,
        };
        let trajectory = integrate(&system, &spec, &excited_vacuum(&system)).unwrap();
        let mut buffer = Vec::new();
        write_csv(&trajectory, &basis, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("t,"));
        assert!(header.ends_with(",norm"));
        assert!(header.contains("A2_F0_re,A2_F0_im,A2_F0_abs"));
        let fields = header.split(',').count();
        assert_eq!(fields, 2 + 3 * basis.len());
        assert_eq!(lines.count(), trajectory.times.len());
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        for row in reader.records() {
            let row = row.unwrap();
            assert_eq!(row.len(), fields);
            let norm: f64 = row[fields - 1].parse().unwrap();
            assert!((norm - 1.0).abs() < 1e-8);
        }
    }
}
