//! Classification by the geometric dichotomy: hyperplane-constancy
//! certificates versus uniform minimal curvature, plus the derived
//! suppression constants (μ, γ, β₀) and the f_ω log-growth fit.

mod critical;
mod hyperplane;
mod probe;

pub use critical::{find_critical_points, CriticalPoint, CriticalPointScan, MORSE_DET_FLOOR};
pub use hyperplane::{find_hyperplanes, HyperplaneCertificate};
pub use probe::{curvature_probe, ProbeGrid, ProbeResult, EPS0_FLOOR};

use crate::dispersion::{DispersionModel, ModelKind};
use crate::quadrature::{f_omega, McConfig, QuadratureEstimate};
use crate::{LabError, Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

/// Constants of the crossing-suppression machinery, evaluated exactly as
/// written from (n₀, ε₀) and the derivative norm bounds M_n.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuppressionConstants {
    pub n0: usize,
    pub eps0: f64,
    /// μ = 1 / (1 + 2^{n₀+3} + M_{n₀+1} 2^{4n₀+1})
    pub mu: f64,
    /// γ = 1 / (3 n₀ (n₀+1)), also kept as an exact fraction.
    pub gamma: f64,
    pub gamma_fraction: (u64, u64),
    /// β₀ = (ε₀ μ^{n₀-1} / (C̃ 2^{3n₀+8} (n₀+1)^{n₀}))^{3(n₀+1)/2}
    pub beta0: f64,
    /// a₀ = max(1, 8 M₂)
    pub a0: f64,
    /// C̃ = 1 + ‖ω‖′_{n₀}
    pub c_tilde: f64,
}

impl SuppressionConstants {
    /// r₀(s) = min(1, s/2).
    pub fn r0(&self, s: f64) -> f64 {
        (s / 2.0).min(1.0)
    }

    /// λ(s) = ¼ min(½, (ε₀/a₀)(r₀(s) μ)^{n₀}).
    pub fn lambda(&self, s: f64) -> f64 {
        0.25 * (0.5f64).min(self.eps0 / self.a0 * (self.r0(s) * self.mu).powi(self.n0 as i32))
    }

    /// δ(s) = λ(s).
    pub fn delta(&self, s: f64) -> f64 {
        self.lambda(s)
    }
}

/// Evaluates μ, γ, β₀ and the cutoff functions from (n₀, ε₀).
pub fn suppression_constants(
    model: &DispersionModel,
    n0: usize,
    eps0: f64,
) -> Result<SuppressionConstants> {
    if n0 < 2 {
        return Err(LabError::PreconditionViolated(format!("n0 = {n0} < 2")));
    }
    if !(eps0 > 0.0 && eps0 <= 0.5) {
        return Err(LabError::PreconditionViolated(format!(
            "eps0 = {eps0} outside (0, 1/2]"
        )));
    }
    let norms = model.smooth_norms(n0 + 1)?;
    let m2 = norms.prime(2);
    let m_n0_plus1 = norms.prime(n0 + 1);
    let mu = 1.0 / (1.0 + 2f64.powi(n0 as i32 + 3) + m_n0_plus1 * 2f64.powi(4 * n0 as i32 + 1));
    let gamma_den = 3 * n0 as u64 * (n0 as u64 + 1);
    let gamma = 1.0 / gamma_den as f64;
    let c_tilde = 1.0 + norms.prime(n0);
    let beta0 = (eps0 * mu.powi(n0 as i32 - 1)
        / (c_tilde * 2f64.powi(3 * n0 as i32 + 8) * (n0 as f64 + 1.0).powi(n0 as i32)))
    .powf(1.5 * (n0 as f64 + 1.0));
    Ok(SuppressionConstants {
        n0,
        eps0,
        mu,
        gamma,
        gamma_fraction: (1, gamma_den),
        beta0,
        a0: (8.0 * m2).max(1.0),
        c_tilde,
    })
}

/// Verdict of the dichotomy test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Suppresses,
    DoesNotSuppress,
    Inconclusive,
}

/// One sampled point of the f_ω(s) diagnostic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FomegaPoint {
    pub s: f64,
    pub estimate: QuadratureEstimate,
}

/// Affine fit of f_ω(s) against ⟨ln s⟩.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FomegaFit {
    pub points: Vec<FomegaPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// 1 when the affine log fit explains the growth, else 0.
    pub p0_estimate: u8,
}

/// Full classification output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema_version: u32,
    pub model: String,
    pub certificates: Vec<HyperplaneCertificate>,
    pub critical_points: Vec<CriticalPoint>,
    pub newton_diverged: u64,
    pub is_morse: bool,
    pub probe: Option<ProbeResult>,
    pub f_omega_fit: Option<FomegaFit>,
    pub constants: Option<SuppressionConstants>,
    pub verdict: Verdict,
    /// Thresholds the verdict was taken at, for auditability.
    pub eps0_floor: f64,
    pub morse_det_floor: f64,
}

/// Knobs for [`classify`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub critical_grid: usize,
    pub probe_n_max: usize,
    pub probe_grid: ProbeGrid,
    pub fomega_samples: u64,
    pub run_fomega: bool,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            critical_grid: 64,
            probe_n_max: 4,
            probe_grid: ProbeGrid::default(),
            fomega_samples: 1_000_000,
            run_fomega: true,
            seed: 0,
        }
    }
}

/// f_ω(s) over s = 2⁻², …, 2⁻⁹ with an affine fit against ⟨ln s⟩.
pub fn fomega_log_fit(model: &DispersionModel, samples: u64, seed: u64) -> Result<FomegaFit> {
    let mut points = Vec::new();
    for e in 2..=9 {
        let s = 2f64.powi(-e);
        let cfg = McConfig {
            samples,
            strata_per_axis: if model.dim() <= 2 { 8 } else { 4 },
            importance_weight: 0.5,
            groups: 15,
            seed: seed ^ (e as u64) << 32,
        };
        let estimate = f_omega(model, s, &cfg)?;
        points.push(FomegaPoint { s, estimate });
    }
    // Least squares of value against ⟨ln s⟩.
    let xs: Vec<f64> = points
        .iter()
        .map(|p| crate::dispersion::sabs(p.s.ln()))
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.estimate.value).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    let p0_estimate = u8::from(slope > 0.0 && r_squared >= 0.9);
    Ok(FomegaFit {
        points,
        slope,
        intercept,
        r_squared,
        p0_estimate,
    })
}

/// Composes certificates, critical points, the curvature probe, and the
/// f_ω fit into the dichotomy verdict.
pub fn classify(model: &DispersionModel, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    let certificates = find_hyperplanes(model)?;

    let (critical_points, newton_diverged, is_morse) = match model.kind() {
        ModelKind::TrigPoly if model.dim() <= 3 => {
            let scan = find_critical_points(model, opts.critical_grid)?;
            let morse = scan.is_morse();
            (scan.points, scan.diverged, morse)
        }
        // Square-root models carry cusp singularities and are never Morse;
        // high-dimensional scans are out of the default budget.
        _ => (Vec::new(), 0, false),
    };

    let probe = match model.kind() {
        ModelKind::TrigPoly if model.dim() >= 2 => {
            Some(curvature_probe(model, opts.probe_n_max, &opts.probe_grid)?)
        }
        _ => None,
    };

    let f_omega_fit = if opts.run_fomega {
        Some(fomega_log_fit(model, opts.fomega_samples, opts.seed)?)
    } else {
        None
    };

    let constants = if certificates.is_empty() {
        probe.as_ref().and_then(|p| {
            p.n0_estimate
                .map(|n0| suppression_constants(model, n0, p.eps0_estimate.min(0.5)))
        })
    } else {
        None
    }
    .transpose()?;

    let verdict = if !certificates.is_empty() {
        Verdict::DoesNotSuppress
    } else if is_morse
        && probe
            .as_ref()
            .map(|p| p.eps0_estimate > EPS0_FLOOR)
            .unwrap_or(false)
    {
        Verdict::Suppresses
    } else {
        Verdict::Inconclusive
    };

    Ok(ClassificationReport {
        schema_version: SCHEMA_VERSION,
        model: model.name().to_string(),
        certificates,
        critical_points,
        newton_diverged,
        is_morse,
        probe,
        f_omega_fit,
        constants,
        verdict,
        eps0_floor: EPS0_FLOOR,
        morse_det_floor: MORSE_DET_FLOOR,
    })
}
