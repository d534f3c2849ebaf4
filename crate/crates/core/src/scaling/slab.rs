//! Slab lower bound: a hyperplane certificate forces
//! I_scr((α,α,α), [r₀u], β) ≥ C²/(2⟨C′⟩³) β⁻¹, with C the measured slab
//! constant and C′ a Lipschitz bound of ω.

use crate::classify::HyperplaneCertificate;
use crate::dispersion::{sabs, DispersionModel, ModelKind};
use crate::quadrature::{in_slab, McConfig, QuadratureEstimate, ResolventQuery};
use crate::quadrature::{run_mc, Proposal};
use crate::rngutil::{derive_seed, Domain};
use crate::{Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

/// The certificate-derived lower-bound constant and its ingredients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlabBound {
    pub certificate: HyperplaneCertificate,
    /// Lipschitz upper estimate C′.
    pub lipschitz: f64,
    /// Measured slab-measure constant C = vol(M'_δ)/δ at δ = β.
    pub slab_constant: f64,
    /// c = C² / (2 ⟨C′⟩³).
    pub lower_bound: f64,
}

/// Bound plus the empirical restricted-integral check at one β.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlabCheck {
    pub schema_version: u32,
    pub beta: f64,
    pub bound: SlabBound,
    /// I_scr restricted to M'_β × M'_β.
    pub restricted: QuadratureEstimate,
    /// restricted ≥ c/β within 3σ.
    pub passes: bool,
}

/// Lipschitz upper estimate: the derivative-norm bound for trig models, a
/// grid supremum with a declared 1.5 safety factor for square roots.
pub fn lipschitz_bound(model: &DispersionModel) -> Result<f64> {
    match model.kind() {
        ModelKind::TrigPoly => Ok(model.smooth_norms(1)?.prime(1)),
        ModelKind::SqrtOfTrigPoly => {
            let per_axis: usize = if model.dim() <= 2 { 256 } else { 48 };
            let d = model.dim();
            let mut sup: f64 = 0.0;
            let mut x = vec![0.0; d];
            for idx in 0..per_axis.pow(d as u32) {
                let mut rem = idx;
                for xi in x.iter_mut() {
                    *xi = (rem % per_axis) as f64 / per_axis as f64 - 0.5;
                    rem /= per_axis;
                }
                if let Ok(g) = model.gradient_norm(&x) {
                    sup = sup.max(g);
                }
            }
            Ok(1.5 * sup)
        }
    }
}

/// Evaluates the slab bound at δ = β and checks the restricted integral.
pub fn slab_lower_bound(
    model: &DispersionModel,
    certificate: &HyperplaneCertificate,
    beta: f64,
    cfg: &McConfig,
) -> Result<SlabCheck> {
    let d = model.dim();
    let u = certificate.u.clone();
    let r0 = certificate.r0;
    let period = certificate.period;
    let alpha = certificate.value;

    // Measured slab volume at δ = β.
    let vol_cfg = McConfig {
        samples: cfg.samples.clamp(100_000, 2_000_000),
        importance_weight: 0.0,
        seed: derive_seed(cfg.seed, Domain::Slab, 1),
        ..cfg.clone()
    };
    let u_vol = u.clone();
    let volume = run_mc(
        move |x: &[f64]| {
            if in_slab(x, &u_vol, r0, beta, period) {
                1.0
            } else {
                0.0
            }
        },
        &Proposal::uniform(&[d]),
        &vol_cfg,
    )?;
    let slab_constant = volume.value / beta;

    let lipschitz = lipschitz_bound(model)?;
    let lower_bound = slab_constant * slab_constant / (2.0 * sabs(lipschitz).powi(3));

    // Restricted crossing integral over M'_β × M'_β, reusing the crossing
    // sampler with the slab indicator folded into the integrand.
    let query = ResolventQuery {
        alpha: [alpha, alpha, alpha],
        beta,
        k0: crate::dispersion::torus_wrap(&u.iter().map(|ui| ui * r0).collect::<Vec<f64>>()),
    };
    let restricted = restricted_crossing(model, &query, &u, r0, beta, period, cfg)?;
    let passes = restricted.value + 3.0 * restricted.standard_error >= lower_bound / beta;

    Ok(SlabCheck {
        schema_version: SCHEMA_VERSION,
        beta,
        bound: SlabBound {
            certificate: certificate.clone(),
            lipschitz,
            slab_constant,
            lower_bound,
        },
        restricted,
        passes,
    })
}

/// I_scr with both integration variables restricted to the slab M'_δ.
pub fn restricted_crossing(
    model: &DispersionModel,
    query: &ResolventQuery,
    u: &[f64],
    r0: f64,
    delta: f64,
    period: f64,
    cfg: &McConfig,
) -> Result<QuadratureEstimate> {
    let d = model.dim();
    let alpha = query.alpha;
    let beta = query.beta;
    let k0 = query.k0.coords().to_vec();
    let u = u.to_vec();

    let mut factors = Vec::with_capacity(2);
    for j in 0..2 {
        let mut fac = crate::quadrature::FactorProposal::uniform(d);
        if cfg.importance_weight > 0.0 {
            fac.components = crate::quadrature::level_seed_boxes(
                model,
                alpha[j],
                beta,
                12,
                cfg.seed,
                0x51ab + j as u64,
            );
        }
        factors.push(fac);
    }

    let f = move |x: &[f64]| {
        let (k1, k2) = x.split_at(d);
        if !in_slab(k1, &u, r0, delta, period) || !in_slab(k2, &u, r0, delta, period) {
            return 0.0;
        }
        let mut k3 = [0.0f64; 8];
        for i in 0..d {
            k3[i] = k1[i] - k2[i] + k0[i];
        }
        let r1 = (alpha[0] - model.eval(k1)).hypot(beta);
        let r2 = (alpha[1] - model.eval(k2)).hypot(beta);
        let r3 = (alpha[2] - model.eval(&k3[..d])).hypot(beta);
        1.0 / (r1 * r2 * r3)
    };
    run_mc(f, &crate::quadrature::Proposal { factors }, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::find_hyperplanes;
    use crate::dispersion::ce_morse_d3;
    use crate::quadrature::crossing_integral;

    #[test]
    fn ce_morse_slab_bound_holds() {
        let m = ce_morse_d3();
        let certs = find_hyperplanes(&m).unwrap();
        let cert = certs
            .iter()
            .find(|c| (c.u[0] - 1.0).abs() < 1e-12 && (c.r0 - 0.25).abs() < 1e-9)
            .unwrap();
        let cfg = McConfig {
            samples: 400_000,
            strata_per_axis: 2,
            importance_weight: 0.5,
            groups: 15,
            seed: 21,
        };
        let check = slab_lower_bound(&m, cert, 0.1, &cfg).unwrap();
        // For u = e₁ the slab volume is exactly 2β, so C ≈ 2.
        assert!(
            (check.bound.slab_constant - 2.0).abs() < 0.05,
            "C = {}",
            check.bound.slab_constant
        );
        assert!(check.bound.lower_bound > 0.0);
        assert!(check.passes, "{check:?}");
        // Restricted integral is far above the (loose) bound.
        assert!(check.restricted.value > check.bound.lower_bound / 0.1);
    }

    #[test]
    fn restricted_never_exceeds_full() {
        let m = ce_morse_d3();
        let certs = find_hyperplanes(&m).unwrap();
        let cert = certs
            .iter()
            .find(|c| (c.u[0] - 1.0).abs() < 1e-12 && (c.r0 - 0.25).abs() < 1e-9)
            .unwrap();
        let cfg = McConfig {
            samples: 200_000,
            strata_per_axis: 2,
            importance_weight: 0.5,
            groups: 15,
            seed: 8,
        };
        let beta = 0.2;
        let query = ResolventQuery {
            alpha: [5.0, 5.0, 5.0],
            beta,
            k0: crate::dispersion::torus_wrap(&[0.25, 0.0, 0.0]),
        };
        let full = crossing_integral(&m, &query, &cfg).unwrap();
        let restricted =
            restricted_crossing(&m, &query, &cert.u, cert.r0, beta, cert.period, &cfg).unwrap();
        let slack = 3.0 * (full.standard_error.powi(2) + restricted.standard_error.powi(2)).sqrt();
        assert!(
            restricted.value <= full.value + slack,
            "restricted {} vs full {}",
            restricted.value,
            full.value
        );
    }
}
