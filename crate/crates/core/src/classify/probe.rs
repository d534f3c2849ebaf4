//! Minimal-curvature probe: grid estimate of the uniform constants
//! (n₀, ε₀) of the curvature alternative
//! max_{2≤n≤n₀} max_{v ⊥ u} |(v·∇)ⁿ ω(k)| / n! > ε₀ for every (k, u).

use crate::dispersion::{DispersionModel, ModelKind, TWO_PI};
use crate::linalg;
use crate::{LabError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Verdict floor: a grid minimum above this counts as positive curvature.
pub const EPS0_FLOOR: f64 = 1e-6;

/// Probe resolution knobs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub k_per_axis: usize,
    pub u_design: usize,
    pub v_design: usize,
    /// Local refinement factor applied around the minima.
    pub refine: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid {
            k_per_axis: 16,
            u_design: 192,
            v_design: 64,
            refine: 4,
        }
    }
}

/// Probe output: the ε₀ profile by derivative order and the minimizer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeResult {
    pub n_max: usize,
    /// eps0_by_n[i] = grid min over (k,u) of B(k,u) with orders 2..=2+i.
    pub eps0_by_n: Vec<f64>,
    /// Smallest order whose grid minimum clears [`EPS0_FLOOR`].
    pub n0_estimate: Option<usize>,
    pub eps0_estimate: f64,
    pub witness_k: Vec<f64>,
    pub witness_u: Vec<f64>,
}

/// Deterministic unit-vector design on S^{d-1}, with the coordinate axes
/// appended so exact symmetry directions are always probed.
fn sphere_design(d: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count + 2 * d);
    match d {
        2 => {
            for i in 0..count {
                let th = TWO_PI * i as f64 / count as f64;
                out.push(vec![th.cos(), th.sin()]);
            }
        }
        3 => {
            // Fibonacci spiral.
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            for i in 0..count {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let th = TWO_PI * i as f64 / golden;
                out.push(vec![r * th.cos(), r * th.sin(), z]);
            }
        }
        _ => {
            // Rejection-free deterministic low-discrepancy fallback.
            let mut state = 0x9e3779b97f4a7c15u64;
            let mut next = || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            while out.len() < count {
                let mut v: Vec<f64> = (0..d).map(|_| 2.0 * next() - 1.0).collect();
                let n = linalg::norm(&v);
                if n > 1e-3 && n <= 1.0 {
                    for x in v.iter_mut() {
                        *x /= n;
                    }
                    out.push(v);
                }
            }
        }
    }
    for axis in 0..d {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[axis] = sign;
            out.push(v);
        }
    }
    out
}

/// Tangent design: unit vectors orthogonal to u.
fn tangent_design(u: &[f64], count: usize) -> Vec<Vec<f64>> {
    let d = u.len();
    let a = linalg::rotation_e1_to(u);
    if d == 2 {
        // Single tangent direction up to sign.
        return vec![vec![a[1], a[3]]];
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let th = TWO_PI * i as f64 / count as f64;
        let (s, c) = th.sin_cos();
        // Combine tangent frame columns 2..d of A (d = 3 case).
        let mut v = vec![0.0; d];
        for r in 0..d {
            v[r] = c * a[r * d + 1] + s * a[r * d + 2];
        }
        out.push(v);
    }
    out
}

/// B-profile at one (k, u): per order n in 2..=n_max, the max over the
/// tangent design of |(v·∇)ⁿω(k)|/n!.
fn order_profile(
    model: &DispersionModel,
    k: &[f64],
    u: &[f64],
    n_max: usize,
    v_design: usize,
) -> Vec<f64> {
    let mut best = vec![0.0f64; n_max - 1];
    let poly = model.inner();
    for v in tangent_design(u, v_design) {
        let mut fact = 1.0;
        for n in 2..=n_max {
            fact *= n as f64;
            let val = poly.directional_derivative(k, &v, n).abs() / fact;
            if val > best[n - 2] {
                best[n - 2] = val;
            }
        }
    }
    best
}

/// Running max over orders: B_cap(k,u) for cap = 2..=n_max.
fn prefix_max(profile: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(profile.len());
    let mut m = f64::NEG_INFINITY;
    for &p in profile {
        m = m.max(p);
        out.push(m);
    }
    out
}

/// Grid estimate of (n₀, ε₀) with the minimizing witness.
pub fn curvature_probe(
    model: &DispersionModel,
    n_max: usize,
    grid: &ProbeGrid,
) -> Result<ProbeResult> {
    if model.kind() != ModelKind::TrigPoly {
        return Err(LabError::UnsupportedModel(
            "curvature probe requires a trigonometric-polynomial model".into(),
        ));
    }
    let d = model.dim();
    if d < 2 {
        return Err(LabError::PreconditionViolated(
            "curvature probe needs dimension >= 2".into(),
        ));
    }
    if !(2..=8).contains(&n_max) {
        return Err(LabError::PreconditionViolated(format!(
            "n_max = {n_max} outside 2..=8"
        )));
    }
    let us = sphere_design(d, grid.u_design);
    let k_total = grid.k_per_axis.pow(d as u32);

    // Coarse pass: per k, min over u of each prefix-max entry, tracking the
    // argmin of the full-order bound.
    struct Cell {
        mins: Vec<f64>,
        witness: (Vec<f64>, Vec<f64>),
        full: f64,
    }
    let cells: Vec<Cell> = (0..k_total)
        .into_par_iter()
        .map(|idx| {
            let mut k = vec![0.0; d];
            let mut rem = idx;
            for ki in k.iter_mut() {
                *ki = (rem % grid.k_per_axis) as f64 / grid.k_per_axis as f64 - 0.5;
                rem /= grid.k_per_axis;
            }
            let mut mins = vec![f64::INFINITY; n_max - 1];
            let mut full = f64::INFINITY;
            let mut w_u = us[0].clone();
            for u in &us {
                let prof = prefix_max(&order_profile(model, &k, u, n_max, grid.v_design));
                for (m, p) in mins.iter_mut().zip(&prof) {
                    *m = m.min(*p);
                }
                if prof[n_max - 2] < full {
                    full = prof[n_max - 2];
                    w_u = u.clone();
                }
            }
            Cell {
                mins,
                witness: (k, w_u),
                full,
            }
        })
        .collect();

    let mut eps0_by_n = vec![f64::INFINITY; n_max - 1];
    let mut witness = cells[0].witness.clone();
    let mut best_full = f64::INFINITY;
    for c in &cells {
        for (e, m) in eps0_by_n.iter_mut().zip(&c.mins) {
            *e = e.min(*m);
        }
        if c.full < best_full {
            best_full = c.full;
            witness = c.witness.clone();
        }
    }

    // Local refinement around the lowest cells.
    if grid.refine > 1 {
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| cells[a].full.partial_cmp(&cells[b].full).unwrap());
        let h = 1.0 / grid.k_per_axis as f64;
        let step = h / grid.refine as f64;
        for &ci in order.iter().take(4) {
            let (k0, u0) = &cells[ci].witness;
            let u_local = refine_directions(u0, grid.refine * 8, 0.35);
            let offsets = 1 + 2 * (grid.refine / 2);
            let mut k = vec![0.0; d];
            for oidx in 0..offsets.pow(d as u32) {
                let mut rem = oidx;
                for (i, ki) in k.iter_mut().enumerate() {
                    let o = (rem % offsets) as i64 - (offsets as i64 / 2);
                    *ki = k0[i] + o as f64 * step;
                    rem /= offsets;
                }
                for u in &u_local {
                    let prof = prefix_max(&order_profile(model, &k, u, n_max, grid.v_design * 2));
                    for (e, p) in eps0_by_n.iter_mut().zip(&prof) {
                        *e = e.min(*p);
                    }
                    if prof[n_max - 2] < best_full {
                        best_full = prof[n_max - 2];
                        witness = (k.clone(), u.clone());
                    }
                }
            }
        }
    }

    let n0_estimate = eps0_by_n
        .iter()
        .position(|&e| e > EPS0_FLOOR)
        .map(|i| i + 2);
    Ok(ProbeResult {
        n_max,
        eps0_by_n,
        n0_estimate,
        eps0_estimate: best_full,
        witness_k: witness.0,
        witness_u: witness.1,
    })
}

/// Deterministic cone of unit directions around u (u itself included).
fn refine_directions(u: &[f64], count: usize, angle: f64) -> Vec<Vec<f64>> {
    let d = u.len();
    let tangents = tangent_design(u, count.max(4));
    let mut out = vec![u.to_vec()];
    for (i, t) in tangents.iter().enumerate() {
        let a = angle * (1.0 + (i % 4) as f64) / 4.0;
        let (s, c) = a.sin_cos();
        let mut v = vec![0.0; d];
        for r in 0..d {
            v[r] = c * u[r] + s * t[r];
        }
        out.push(v);
    }
    out
}
