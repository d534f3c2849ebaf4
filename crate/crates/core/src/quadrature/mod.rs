//! Integral evaluation: adaptive one-dimensional resolvent integrals, the
//! stratified Monte Carlo engine on tori, the crossing integral over
//! (T^d)², and the gradient-singularity diagnostic f_ω.

mod engine;
mod integrals;
mod resolvent1d;

pub use engine::McConfig;
pub use integrals::{crossing_integral, f_omega, resolvent_torus};
pub use resolvent1d::{resolvent_1d, resolvent_line_poly};

pub(crate) use engine::{run_mc, FactorProposal, Proposal};
pub(crate) use integrals::{in_slab, level_seed_boxes};

use crate::dispersion::TorusPoint;
use crate::{LabError, Result};
use serde::{Deserialize, Serialize};

/// Parameters (α, β, k₀) of one crossing-integral evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventQuery {
    pub alpha: [f64; 3],
    pub beta: f64,
    pub k0: TorusPoint,
}

impl ResolventQuery {
    pub fn new(alpha: [f64; 3], beta: f64, k0: TorusPoint) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(LabError::InvalidConfig(format!(
                "beta = {beta} outside (0, 1]"
            )));
        }
        Ok(ResolventQuery { alpha, beta, k0 })
    }
}

/// A Monte Carlo integral value with its sampling error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub strata: u64,
    pub seed: u64,
    /// Seconds; not part of the deterministic payload.
    pub wall_time: f64,
}

impl QuadratureEstimate {
    /// Copy with the timing field zeroed, for byte-comparable artifacts.
    pub fn canonical(&self) -> Self {
        QuadratureEstimate {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}
