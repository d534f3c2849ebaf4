//! Numerical laboratory for resolvent and crossing integrals of periodic
//! lattice dispersion relations.
//!
//! The crate evaluates singular resolvent integrals over the unit torus,
//! classifies dispersion relations by the dichotomy between hyperplane
//! constancy and uniform minimal curvature, and checks a family of explicit
//! inequalities (one-dimensional resolvent bounds, level-set chart bounds,
//! curvature recursions) at desk scale.
//!
//! Modules map onto the main subsystems:
//!
//! * [`dispersion`]: exact trigonometric-polynomial dispersion relations,
//!   torus geometry, derivative norms, and the text model format.
//! * [`calculus`]: composite derivatives, the level-set chart, level
//!   curves, the curvature-coefficient recursion, and ν-selection.
//! * [`quadrature`]: adaptive 1D resolvent integrals and the stratified
//!   Monte Carlo engine for torus and crossing integrals.
//! * [`classify`]: hyperplane certificates, critical points, the minimal
//!   curvature probe, and derived suppression constants.
//! * [`scaling`]: β-sweeps, supremum scans, power-law fits, and the slab
//!   lower-bound construction.
//! * [`verify`]: the seeded golden-check orchestration and report format.

pub mod calculus;
pub mod classify;
pub mod dispersion;
mod error;
pub(crate) mod linalg;
pub mod parallel;
pub mod quadrature;
pub(crate) mod rngutil;
pub mod scaling;
pub mod verify;

pub use error::{LabError, Result};

/// Version tag stamped into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;
