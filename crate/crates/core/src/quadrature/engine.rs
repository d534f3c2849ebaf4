//! Stratified Monte Carlo with a defensive importance mixture.
//!
//! The torus cube is cut into S equal cells per replica; G replicas make up
//! the median-of-means groups. Each (replica, stratum) task owns a disjoint
//! ChaCha stream and a fixed sample count, so the reduction is independent
//! of worker count. Per task, a deterministic share p of the samples is
//! drawn from the importance proposal (boxes around level-set seed points,
//! radial shells around gradient minima) and the rest uniformly inside the
//! cell; every sample is weighted by the multiple-importance balance rule
//!
//! ```text
//! value = Σ_samples f(x) / D(x),   D(x) = n_uni(cell(x))·S + N_imp·q_imp(x),
//! ```
//!
//! which is unbiased for any proposal as long as the uniform floor keeps
//! D positive wherever f is nonzero.

use crate::dispersion::wrap_coord;
use crate::linalg;
use crate::quadrature::QuadratureEstimate;
use crate::rngutil::{stream_rng, Domain};
use crate::{LabError, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sampling configuration shared by the torus integrals.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    /// Total sample budget.
    pub samples: u64,
    /// Strata per torus axis; the stratum count is this to the power of the
    /// integration dimension.
    pub strata_per_axis: usize,
    /// Importance-mixture weight p in [0, 1].
    pub importance_weight: f64,
    /// Median-of-means group count (odd).
    pub groups: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 1_000_000,
            strata_per_axis: 2,
            importance_weight: 0.5,
            groups: 15,
            seed: 0,
        }
    }
}

impl McConfig {
    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, n_axes: usize) -> Result<()> {
        if self.groups == 0 || self.groups.is_multiple_of(2) {
            return Err(LabError::InvalidConfig(format!(
                "groups = {} must be odd",
                self.groups
            )));
        }
        if self.strata_per_axis == 0 {
            return Err(LabError::InvalidConfig("strata_per_axis = 0".into()));
        }
        let strata = (self.strata_per_axis as u64).pow(n_axes as u32);
        if strata > 1 << 20 {
            return Err(LabError::InvalidConfig(format!(
                "{strata} strata is beyond the layout cap"
            )));
        }
        if self.samples < strata {
            return Err(LabError::InvalidConfig(format!(
                "samples = {} below the stratum count {strata}",
                self.samples
            )));
        }
        if !(0.0..=1.0).contains(&self.importance_weight) {
            return Err(LabError::InvalidConfig(format!(
                "importance_weight = {} outside [0, 1]",
                self.importance_weight
            )));
        }
        Ok(())
    }
}

/// Axis-oriented box around a level-set seed point: local frame rows are
/// the columns of the rotation A (A e₁ = normal direction).
#[derive(Clone, Debug)]
pub(crate) struct OrientedBox {
    pub center: Vec<f64>,
    /// Row-major rotation with first column = surface normal.
    pub rot_a: Vec<f64>,
    pub half_widths: Vec<f64>,
}

impl OrientedBox {
    fn volume(&self) -> f64 {
        self.half_widths.iter().map(|h| 2.0 * h).product()
    }

    fn density(&self, x: &[f64], scratch: &mut [f64], local: &mut [f64]) -> f64 {
        let d = self.center.len();
        for i in 0..d {
            scratch[i] = wrap_coord(x[i] - self.center[i]);
        }
        linalg::matvec_t(&self.rot_a, &scratch[..d], &mut local[..d]);
        for i in 0..d {
            if local[i].abs() > self.half_widths[i] {
                return 0.0;
            }
        }
        1.0 / self.volume()
    }

    fn sample(&self, rng: &mut impl Rng, out: &mut [f64]) {
        let d = self.center.len();
        let mut local = [0.0f64; 8];
        for i in 0..d {
            local[i] = rng.random_range(-self.half_widths[i]..self.half_widths[i]);
        }
        let mut world = [0.0f64; 8];
        linalg::matvec(&self.rot_a, &local[..d], &mut world[..d]);
        for i in 0..d {
            out[i] = wrap_coord(self.center[i] + world[i]);
        }
    }
}

/// Radial shell with log-uniform radius around a gradient minimum.
#[derive(Clone, Debug)]
pub(crate) struct RadialShell {
    pub center: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
}

impl RadialShell {
    fn sphere_area(d: usize) -> f64 {
        match d {
            1 => 2.0,
            2 => std::f64::consts::TAU,
            3 => 2.0 * std::f64::consts::TAU,
            4 => std::f64::consts::TAU * std::f64::consts::TAU,
            _ => unreachable!("dimension cap"),
        }
    }

    fn density(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        let d = self.center.len();
        for i in 0..d {
            scratch[i] = wrap_coord(x[i] - self.center[i]);
        }
        let r = linalg::norm(&scratch[..d]);
        if r < self.r_min || r > self.r_max {
            return 0.0;
        }
        1.0 / ((self.r_max / self.r_min).ln() * Self::sphere_area(d) * r.powi(d as i32))
    }

    fn sample(&self, rng: &mut impl Rng, out: &mut [f64]) {
        let d = self.center.len();
        let u: f64 = rng.random();
        let r = self.r_min * (self.r_max / self.r_min).powf(u);
        // Uniform direction by normal deviates (Box-Muller pairs).
        let mut dir = [0.0f64; 8];
        let mut norm_sq = 0.0;
        for i in 0..d {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            let g = (-2.0 * a.max(1e-300).ln()).sqrt() * (std::f64::consts::TAU * b).cos();
            dir[i] = g;
            norm_sq += g * g;
        }
        let scale = r / norm_sq.sqrt().max(1e-300);
        for i in 0..d {
            out[i] = wrap_coord(self.center[i] + dir[i] * scale);
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Component {
    Box(OrientedBox),
    Shell(RadialShell),
}

impl Component {
    fn density(&self, x: &[f64], scratch: &mut [f64], local: &mut [f64]) -> f64 {
        match self {
            Component::Box(b) => b.density(x, scratch, local),
            Component::Shell(s) => s.density(x, scratch),
        }
    }

    fn sample(&self, rng: &mut impl Rng, out: &mut [f64]) {
        match self {
            Component::Box(b) => b.sample(rng, out),
            Component::Shell(s) => s.sample(rng, out),
        }
    }
}

/// Importance proposal for one torus factor; empty components mean uniform.
#[derive(Clone, Debug, Default)]
pub(crate) struct FactorProposal {
    pub dim: usize,
    pub components: Vec<Component>,
}

impl FactorProposal {
    pub fn uniform(dim: usize) -> Self {
        FactorProposal {
            dim,
            components: Vec::new(),
        }
    }

    fn density(&self, x: &[f64]) -> f64 {
        if self.components.is_empty() {
            return 1.0;
        }
        let mut scratch = [0.0f64; 8];
        let mut local = [0.0f64; 8];
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.density(x, &mut scratch, &mut local);
        }
        acc / self.components.len() as f64
    }

    fn sample(&self, rng: &mut impl Rng, out: &mut [f64]) {
        if self.components.is_empty() {
            for o in out.iter_mut() {
                *o = rng.random_range(-0.5..0.5);
            }
            return;
        }
        let pick = rng.random_range(0..self.components.len());
        self.components[pick].sample(rng, out);
    }
}

/// Product proposal over the torus factors of the integration domain.
#[derive(Clone, Debug, Default)]
pub(crate) struct Proposal {
    pub factors: Vec<FactorProposal>,
}

impl Proposal {
    pub fn uniform(dims: &[usize]) -> Self {
        Proposal {
            factors: dims.iter().map(|&d| FactorProposal::uniform(d)).collect(),
        }
    }

    pub fn n_axes(&self) -> usize {
        self.factors.iter().map(|f| f.dim).sum()
    }

    fn is_uniform(&self) -> bool {
        self.factors.iter().all(|f| f.components.is_empty())
    }

    fn density(&self, x: &[f64]) -> f64 {
        let mut acc = 1.0;
        let mut off = 0;
        for f in &self.factors {
            acc *= f.density(&x[off..off + f.dim]);
            if acc == 0.0 {
                return 0.0;
            }
            off += f.dim;
        }
        acc
    }

    fn sample(&self, rng: &mut impl Rng, out: &mut [f64]) {
        let mut off = 0;
        for f in &self.factors {
            f.sample(rng, &mut out[off..off + f.dim]);
            off += f.dim;
        }
    }
}

/// Fraction of each task reserved for uniform draws so the mixture density
/// keeps a positive floor everywhere.
const MAX_IMPORTANCE_FRACTION: f64 = 0.9;

pub(crate) fn run_mc<F>(f: F, proposal: &Proposal, cfg: &McConfig) -> Result<QuadratureEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let start = std::time::Instant::now();
    let n_axes = proposal.n_axes();
    cfg.validate(n_axes)?;
    let spa = cfg.strata_per_axis;
    let strata = (spa as u64).pow(n_axes as u32) as usize;
    let groups = cfg.groups;
    let tasks = strata * groups;

    let p_eff = if proposal.is_uniform() {
        0.0
    } else {
        cfg.importance_weight.min(MAX_IMPORTANCE_FRACTION)
    };

    // Deterministic allocation: task_id = replica * strata + stratum.
    let base = cfg.samples / tasks as u64;
    let rem = (cfg.samples - base * tasks as u64) as usize;
    let n_total = |task: usize| -> u64 { base + u64::from(task < rem) };
    let mut n_imp = vec![0u64; tasks];
    let mut n_uni = vec![0u64; tasks];
    for t in 0..tasks {
        let n = n_total(t);
        let ni = ((n as f64) * p_eff).round() as u64;
        n_imp[t] = ni.min(n);
        n_uni[t] = n - n_imp[t];
    }
    // Replica-level tables for the balance denominator.
    let mut imp_per_replica = vec![0u64; groups];
    for r in 0..groups {
        for s in 0..strata {
            imp_per_replica[r] += n_imp[r * strata + s];
        }
    }

    let cell_of = |x: &[f64]| -> usize {
        let mut idx = 0usize;
        for &xi in x.iter().rev() {
            let c = (((xi + 0.5) * spa as f64) as usize).min(spa - 1);
            idx = idx * spa + c;
        }
        idx
    };

    let task_sums: Vec<f64> = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let replica = task / strata;
            let stratum = task % strata;
            let mut rng = stream_rng(cfg.seed, Domain::McTask, task as u64);
            let mut x = vec![0.0f64; n_axes];
            // Cell lower corner in [-1/2, 1/2)^n.
            let mut corner = vec![0.0f64; n_axes];
            {
                let mut remidx = stratum;
                for c in corner.iter_mut() {
                    *c = -0.5 + (remidx % spa) as f64 / spa as f64;
                    remidx /= spa;
                }
            }
            let cell_width = 1.0 / spa as f64;
            let n_imp_replica = imp_per_replica[replica] as f64;
            let uni_base = replica * strata;
            let mut acc = 0.0;
            for i in 0..n_total(task) {
                let from_importance = i >= n_uni[task];
                if from_importance {
                    proposal.sample(&mut rng, &mut x);
                } else {
                    for (xi, c) in x.iter_mut().zip(&corner) {
                        *xi = c + rng.random::<f64>() * cell_width;
                    }
                }
                let fx = f(&x);
                if fx == 0.0 {
                    continue;
                }
                let cell = if from_importance {
                    cell_of(&x)
                } else {
                    stratum
                };
                let mut denom = (n_uni[uni_base + cell] * strata as u64) as f64;
                if p_eff > 0.0 {
                    denom += n_imp_replica * proposal.density(&x);
                }
                acc += fx / denom;
            }
            acc
        })
        .collect();

    // Replica estimates reduced in fixed order.
    let mut replica_values = vec![0.0f64; groups];
    for (task, sum) in task_sums.iter().enumerate() {
        replica_values[task / strata] += sum;
    }
    let mean = replica_values.iter().sum::<f64>() / groups as f64;
    let var = replica_values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (groups as f64 - 1.0).max(1.0);
    let standard_error = (var / groups as f64).sqrt();

    Ok(QuadratureEstimate {
        value: mean,
        standard_error,
        samples: cfg.samples,
        strata: strata as u64,
        seed: cfg.seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_is_exact() {
        let cfg = McConfig {
            samples: 15_000,
            strata_per_axis: 2,
            importance_weight: 0.0,
            groups: 15,
            seed: 7,
        };
        let prop = Proposal::uniform(&[3]);
        let est = run_mc(|_| 2.5, &prop, &cfg).unwrap();
        assert!((est.value - 2.5).abs() < 1e-12);
        assert!(est.standard_error < 1e-12);
    }

    #[test]
    fn smooth_integrand_matches_closed_form() {
        // ∫_{T²} cos²(2πx₁) dx = 1/2.
        let cfg = McConfig {
            samples: 200_000,
            strata_per_axis: 8,
            importance_weight: 0.0,
            groups: 15,
            seed: 3,
        };
        let prop = Proposal::uniform(&[2]);
        let est = run_mc(
            |x| {
                let c = (std::f64::consts::TAU * x[0]).cos();
                c * c
            },
            &prop,
            &cfg,
        )
        .unwrap();
        assert!(
            (est.value - 0.5).abs() < 4.0 * est.standard_error.max(1e-6),
            "{} ± {}",
            est.value,
            est.standard_error
        );
    }

    #[test]
    fn importance_mixture_stays_unbiased() {
        // Integrand concentrated near a point; box proposal on that point.
        let target = [0.2, -0.3];
        let f = move |x: &[f64]| {
            let d2 = crate::dispersion::torus_distance(x, &target).powi(2);
            (-d2 / (2.0 * 0.05 * 0.05)).exp()
        };
        // True value ≈ 2π σ² for a narrow Gaussian on the torus.
        let truth = std::f64::consts::TAU * 0.05 * 0.05;
        let boxes = FactorProposal {
            dim: 2,
            components: vec![Component::Box(OrientedBox {
                center: target.to_vec(),
                rot_a: vec![1.0, 0.0, 0.0, 1.0],
                half_widths: vec![0.25, 0.25],
            })],
        };
        for (p, samples) in [(0.0, 800_000u64), (0.5, 100_000), (0.9, 100_000)] {
            let cfg = McConfig {
                samples,
                strata_per_axis: 4,
                importance_weight: p,
                groups: 15,
                seed: 11,
            };
            let est = run_mc(
                f,
                &Proposal {
                    factors: vec![boxes.clone()],
                },
                &cfg,
            )
            .unwrap();
            assert!(
                (est.value - truth).abs() < 4.0 * est.standard_error + 1e-4 * truth,
                "p={p}: {} ± {} vs {truth}",
                est.value,
                est.standard_error
            );
        }
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let cfg = McConfig {
            samples: 50_000,
            strata_per_axis: 3,
            importance_weight: 0.0,
            groups: 15,
            seed: 99,
        };
        let prop = Proposal::uniform(&[2]);
        let f = |x: &[f64]| 1.0 / ((x[0] * x[0] + x[1] * x[1]).sqrt() + 0.1);
        let a = crate::parallel::with_workers(1, || run_mc(f, &prop, &cfg).unwrap()).unwrap();
        let b = crate::parallel::with_workers(4, || run_mc(f, &prop, &cfg).unwrap()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.standard_error.to_bits(), b.standard_error.to_bits());
    }

    #[test]
    fn shell_component_density_integrates_to_one() {
        // Sample the shell and average 1/q(x): should return its support
        // volume only if q were uniform, so instead check normalization by
        // integrating q over the torus with a uniform MC.
        let shell = RadialShell {
            center: vec![0.0, 0.0, 0.0],
            r_min: 1e-3,
            r_max: 0.3,
        };
        let prop = FactorProposal {
            dim: 3,
            components: vec![Component::Shell(shell)],
        };
        let cfg = McConfig {
            samples: 400_000,
            strata_per_axis: 4,
            importance_weight: 0.0,
            groups: 15,
            seed: 5,
        };
        let est = run_mc(|x| prop.density(x), &Proposal::uniform(&[3]), &cfg).unwrap();
        assert!(
            (est.value - 1.0).abs() < 5.0 * est.standard_error + 0.01,
            "{} ± {}",
            est.value,
            est.standard_error
        );
    }
}
