//! Critical-point enumeration by Newton polish from a dense seed grid.

use crate::dispersion::{torus_distance, torus_wrap, DispersionModel, ModelKind, TorusPoint};
use crate::linalg;
use crate::{LabError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Deduplication radius for polished points.
const DEDUP_RADIUS: f64 = 1e-6;
/// Gradient residual accepted after polish.
const RESIDUAL_TOL: f64 = 1e-10;
/// Morse threshold on |det D²ω|.
pub const MORSE_DET_FLOOR: f64 = 1e-9;

/// A polished critical point with its Hessian data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: TorusPoint,
    pub value: f64,
    pub hessian_det: f64,
    /// Count of negative Hessian eigenvalues.
    pub index: usize,
}

/// Scan result: points plus the count of dropped (non-converged) seeds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalPointScan {
    pub points: Vec<CriticalPoint>,
    pub diverged: u64,
    pub grid_per_axis: usize,
}

impl CriticalPointScan {
    pub fn is_morse(&self) -> bool {
        !self.points.is_empty()
            && self
                .points
                .iter()
                .all(|p| p.hessian_det.abs() > MORSE_DET_FLOOR)
    }
}

fn newton_polish(model: &DispersionModel, seed: &[f64]) -> Option<Vec<f64>> {
    let d = model.dim();
    let mut x = seed.to_vec();
    for _ in 0..60 {
        let g = model.gradient(&x).ok()?;
        if linalg::norm(&g) < 1e-13 {
            break;
        }
        let mut h = model.hessian(&x).ok()?;
        let mut rhs = g;
        let step = linalg::solve(&mut h, &mut rhs)?;
        let step_norm = linalg::norm(&step);
        if step_norm > 0.5 {
            return None;
        }
        for i in 0..d {
            x[i] -= step[i];
        }
        if step_norm < 1e-14 {
            break;
        }
    }
    let g = model.gradient(&x).ok()?;
    if linalg::norm(&g) < RESIDUAL_TOL {
        Some(torus_wrap(&x).into_coords())
    } else {
        None
    }
}

/// Enumerates the critical points of ω from a `per_axis`^d seed grid.
pub fn find_critical_points(model: &DispersionModel, per_axis: usize) -> Result<CriticalPointScan> {
    if model.kind() != ModelKind::TrigPoly {
        return Err(LabError::UnsupportedModel(
            "critical-point scan requires a trigonometric-polynomial model".into(),
        ));
    }
    let d = model.dim();
    if d > 3 {
        return Err(LabError::PreconditionViolated(
            "critical-point scan supports d <= 3".into(),
        ));
    }
    let total = per_axis.pow(d as u32);
    let polished: Vec<Option<Vec<f64>>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut x = vec![0.0; d];
            let mut rem = idx;
            for xi in x.iter_mut() {
                *xi = (rem % per_axis) as f64 / per_axis as f64 - 0.5;
                rem /= per_axis;
            }
            newton_polish(model, &x)
        })
        .collect();

    let mut diverged = 0u64;
    let mut locations: Vec<Vec<f64>> = Vec::new();
    for p in polished {
        match p {
            None => diverged += 1,
            Some(x) => {
                if locations
                    .iter()
                    .all(|l| torus_distance(l, &x) > DEDUP_RADIUS)
                {
                    locations.push(x);
                }
            }
        }
    }
    locations.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut points = Vec::with_capacity(locations.len());
    for loc in locations {
        let h = model.hessian(&loc)?;
        let det = linalg::det(&h, d);
        let eigs = linalg::symmetric_eigenvalues(&h, d);
        let index = eigs.iter().filter(|&&e| e < 0.0).count();
        points.push(CriticalPoint {
            value: model.eval(&loc),
            location: torus_wrap(&loc),
            hessian_det: det,
            index,
        });
    }
    Ok(CriticalPointScan {
        points,
        diverged,
        grid_per_axis: per_axis,
    })
}
