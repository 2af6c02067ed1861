//! Simulation, extraction and reconstruction toolkit for valley-dependent
//! electron g-factor maps measured by conveyor-mode spin shuttling.
//!
//! The crate is organized along the measurement chain:
//!
//! * [`physics`] — closed-form device physics (drive waveform, ST
//!   precession, valley-mixture algebra, g± = g0 ± δg_max·cos φ).
//! * [`field`] — the hidden ground truth: complex intervalley coupling
//!   Δ(d, y) as a pair of correlated Gaussian random fields.
//! * [`signal`] — forward simulation of singlet-return rasters
//!   P_S(d, τ_W) with dephasing and finite-shot sampling.
//! * [`extraction`] — column-wise FFT, Δg peak picking and (d, y) map
//!   assembly.
//! * [`reconstruction`] — the inverse problem: recover complex Δ(d)
//!   traces from |δg| and E_VS scanlines, including branch-sign
//!   disambiguation over the full complex plane.
//! * [`stats`] — distribution fits (Gaussian, Rayleigh, Rician, arcsine),
//!   KS tests, Pearson correlation, boxplot summaries and the
//!   smoothing-induced phase-clustering demonstration.
//! * [`io`] — CSV schemas, JSON sidecars and run manifests.

pub mod error;
pub mod extraction;
pub mod field;
pub mod io;
pub mod physics;
pub mod reconstruction;
pub mod signal;
pub mod stats;

pub use error::{Error, Result};
