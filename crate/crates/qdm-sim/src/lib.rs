//! Simulation engine for systems of multi-level quantum dots coupled to the
//! modes of a single cavity.
//!
//! The crate models k dots (each with its own ladder of levels) interacting
//! with w quantized field modes and with each other through dipole-dipole
//! coupling. The state is expanded over product labels (dot levels, photon
//! numbers) and the interaction-picture equations of motion are generated
//! term by term. Two solution routes are provided:
//!
//! - a numeric route (forward Euler and RK4) that integrates the phased
//!   equations directly and works for any mode count, with or without the
//!   rotating-wave approximation;
//! - an analytic route, available for single-mode RWA systems, that folds
//!   each conserved ladder of amplitudes into a constant Hermitian matrix
//!   and propagates it exactly through an eigendecomposition.
//!
//! On top of the propagators sit an entanglement monitor (a concurrence-like
//! measure for the two-dot, two-mode configuration) and a small CLI for
//! batch runs.
//!
//! Internally hbar = 1: every energy is an angular frequency in rad/s and
//! time is in seconds. Configuration files may declare plain-Hz numbers,
//! which validation converts exactly once.

pub mod analytic;
pub mod basis;
pub mod cli;
pub mod config;
pub mod entangle;
pub mod model;
pub mod numeric;
pub mod rabi;
