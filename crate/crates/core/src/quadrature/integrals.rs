//! The torus integrals: single-resolvent (weighted and unweighted), the
//! crossing integral over (T^d)², and the diagnostic f_ω(s).

use super::engine::{run_mc, Component, FactorProposal, OrientedBox, Proposal, RadialShell};
use super::{McConfig, QuadratureEstimate, ResolventQuery};
use crate::dispersion::{wrap_coord, DispersionModel, ModelKind};
use crate::linalg;
use crate::rngutil::{stream_rng, Domain};
use crate::{LabError, Result};
use rand::Rng;

/// Seeds per resolvent factor for the importance proposal.
const SEEDS_PER_FACTOR: usize = 12;
/// Tangential half-width of a level-set box.
const TANGENT_HALF_WIDTH: f64 = 0.12;

/// Finds up to `count` points on the level set ω = target by 1D
/// root-finding along random rays, and wraps each in an oriented box whose
/// normal half-width tracks the resolvent width β/|∇ω|.
pub(crate) fn level_seed_boxes(
    model: &DispersionModel,
    target: f64,
    beta: f64,
    count: usize,
    seed: u64,
    stream: u64,
) -> Vec<Component> {
    let d = model.dim();
    let mut rng = stream_rng(seed, Domain::ImportanceSeeds, stream);
    let mut boxes: Vec<Component> = Vec::new();
    let scan = 64;
    'rays: for _attempt in 0..16 * count {
        if boxes.len() >= count {
            break;
        }
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
        let mut w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let wn = linalg::norm(&w);
        if wn < 1e-9 {
            continue;
        }
        for wi in w.iter_mut() {
            *wi /= wn;
        }
        let at = |t: f64| {
            let x: Vec<f64> = a.iter().zip(&w).map(|(ai, wi)| ai + t * wi).collect();
            model.eval(&x) - target
        };
        let mut prev_t = 0.0;
        let mut prev_v = at(0.0);
        for i in 1..=scan {
            let t = i as f64 / scan as f64;
            let v = at(t);
            if prev_v == 0.0 || prev_v.signum() != v.signum() {
                let (mut lo, mut hi) = (prev_t, t);
                let mut flo = prev_v;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let fm = at(mid);
                    if fm == 0.0 || fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                let root = 0.5 * (lo + hi);
                let x: Vec<f64> = a
                    .iter()
                    .zip(&w)
                    .map(|(ai, wi)| wrap_coord(ai + root * wi))
                    .collect();
                let grad_norm = match model.gradient_norm(&x) {
                    Ok(g) if g > 1e-8 => g,
                    _ => continue 'rays,
                };
                let grad = match model.gradient(&x) {
                    Ok(g) => g,
                    Err(_) => continue 'rays,
                };
                let u = linalg::scaled(&grad, 1.0 / grad_norm);
                let normal_h = (8.0 * beta / grad_norm).clamp(1e-4, 0.1);
                let mut half_widths = vec![TANGENT_HALF_WIDTH; d];
                half_widths[0] = normal_h;
                boxes.push(Component::Box(OrientedBox {
                    center: x,
                    rot_a: linalg::rotation_e1_to(&u),
                    half_widths,
                }));
                continue 'rays;
            }
            prev_t = t;
            prev_v = v;
        }
    }
    boxes
}

/// Radial shells around local minima of |∇ω| (the r⁻³ mass concentrators).
fn gradient_minimum_shells(model: &DispersionModel, s: f64) -> Vec<Component> {
    let d = model.dim();
    let per_axis: usize = match d {
        1 => 512,
        2 => 48,
        3 => 24,
        _ => 10,
    };
    let norm_at = |x: &[f64]| model.gradient_norm(x).unwrap_or(f64::INFINITY);
    let mut centers: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut x = vec![0.0; d];
    for idx in 0..per_axis.pow(d as u32) {
        let mut rem = idx;
        for xi in x.iter_mut() {
            *xi = (rem % per_axis) as f64 / per_axis as f64 - 0.5;
            rem /= per_axis;
        }
        let w = norm_at(&x);
        if w > 1.0 {
            continue;
        }
        // Local minimum against the 2d axis neighbors.
        let h = 1.0 / per_axis as f64;
        let mut is_min = true;
        for axis in 0..d {
            for delta in [-h, h] {
                let mut y = x.clone();
                y[axis] = wrap_coord(y[axis] + delta);
                if norm_at(&y) < w {
                    is_min = false;
                    break;
                }
            }
            if !is_min {
                break;
            }
        }
        if is_min
            && centers
                .iter()
                .all(|(c, _)| crate::dispersion::torus_distance(c, &x) > 5e-2)
        {
            centers.push((x.clone(), w));
        }
    }
    let m2 = match model.kind() {
        ModelKind::TrigPoly => model.smooth_norms(2).map(|n| n.prime(2)).unwrap_or(40.0),
        ModelKind::SqrtOfTrigPoly => 40.0,
    };
    centers
        .into_iter()
        .map(|(c, _)| {
            Component::Shell(RadialShell {
                center: c,
                r_min: (s / (8.0 * m2)).max(1e-7),
                r_max: 0.35,
            })
        })
        .collect()
}

#[inline]
fn resolvent_factor(alpha: f64, omega: f64, beta: f64) -> f64 {
    (alpha - omega).hypot(beta).recip()
}

/// Monte Carlo estimate of the crossing integral
/// I_scr(α, k₀, β) = ∫ dk₁ dk₂ ∏_j 1/|α_j - ω(k_j) + iβ|, k₃ = k₁ - k₂ + k₀.
pub fn crossing_integral(
    model: &DispersionModel,
    query: &ResolventQuery,
    cfg: &McConfig,
) -> Result<QuadratureEstimate> {
    let d = model.dim();
    if query.k0.dim() != d {
        return Err(LabError::InvalidConfig(format!(
            "k0 has dimension {}, model {d}",
            query.k0.dim()
        )));
    }
    if !(query.beta > 0.0 && query.beta <= 1.0) {
        return Err(LabError::InvalidConfig(format!(
            "beta = {} outside (0, 1]",
            query.beta
        )));
    }
    let beta = query.beta;
    let alpha = query.alpha;
    let k0 = query.k0.coords().to_vec();

    let mut factors = Vec::with_capacity(2);
    for j in 0..2 {
        let mut fac = FactorProposal::uniform(d);
        if cfg.importance_weight > 0.0 {
            fac.components =
                level_seed_boxes(model, alpha[j], beta, SEEDS_PER_FACTOR, cfg.seed, j as u64);
        }
        factors.push(fac);
    }
    let proposal = Proposal { factors };

    let f = move |x: &[f64]| {
        let (k1, k2) = x.split_at(d);
        let mut k3 = [0.0f64; 8];
        for i in 0..d {
            k3[i] = k1[i] - k2[i] + k0[i];
        }
        resolvent_factor(alpha[0], model.eval(k1), beta)
            * resolvent_factor(alpha[1], model.eval(k2), beta)
            * resolvent_factor(alpha[2], model.eval(&k3[..d]), beta)
    };
    run_mc(f, &proposal, cfg)
}

/// Monte Carlo estimate of the weighted single-resolvent integral
/// ∫_{T^d} dk 1(|∇ω| ≥ s) |∇ω|^{-p} / |α - ω(k) + iβ|.
pub fn resolvent_torus(
    model: &DispersionModel,
    alpha: f64,
    beta: f64,
    weight_power: f64,
    gradient_floor: f64,
    cfg: &McConfig,
) -> Result<QuadratureEstimate> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(LabError::InvalidConfig(format!(
            "beta = {beta} outside (0, 1]"
        )));
    }
    if !(0.0..=1.0).contains(&weight_power) {
        return Err(LabError::InvalidConfig(format!(
            "weight power {weight_power} outside [0, 1]"
        )));
    }
    if model.kind() == ModelKind::SqrtOfTrigPoly && weight_power > 0.0 && gradient_floor == 0.0 {
        return Err(LabError::CuspSingularity {
            point: model.cusp_points().first().cloned().unwrap_or_default(),
        });
    }
    let d = model.dim();
    let mut fac = FactorProposal::uniform(d);
    if cfg.importance_weight > 0.0 {
        fac.components = level_seed_boxes(model, alpha, beta, SEEDS_PER_FACTOR, cfg.seed, 0x10);
    }
    let proposal = Proposal { factors: vec![fac] };
    let needs_gradient = weight_power > 0.0 || gradient_floor > 0.0;
    let f = move |x: &[f64]| {
        let res = resolvent_factor(alpha, model.eval(x), beta);
        if !needs_gradient {
            return res;
        }
        // Points inside the cusp exclusion zone carry indicator 0.
        let w = match model.gradient_norm(x) {
            Ok(w) => w,
            Err(_) => return 0.0,
        };
        if w < gradient_floor {
            return 0.0;
        }
        if weight_power == 0.0 {
            res
        } else {
            res * w.powf(-weight_power)
        }
    };
    run_mc(f, &proposal, cfg)
}

/// Monte Carlo estimate of f_ω(s) = ∫_{T^d} dk |∇ω(k)|⁻³ 1(|∇ω(k)| ≥ s).
pub fn f_omega(model: &DispersionModel, s: f64, cfg: &McConfig) -> Result<QuadratureEstimate> {
    if !(s > 0.0) {
        return Err(LabError::PreconditionViolated(format!(
            "s = {s} must be positive"
        )));
    }
    let d = model.dim();
    let mut fac = FactorProposal::uniform(d);
    if cfg.importance_weight > 0.0 {
        fac.components = gradient_minimum_shells(model, s);
    }
    let proposal = Proposal { factors: vec![fac] };
    let f = move |x: &[f64]| {
        let w = match model.gradient_norm(x) {
            Ok(w) => w,
            Err(_) => return 0.0,
        };
        if w < s {
            0.0
        } else {
            w.powi(-3)
        }
    };
    run_mc(f, &proposal, cfg)
}

/// Indicator of the slab M'_δ = {[x] : |x·u - r₀| ≤ δ (mod the direction
/// period)}; `period` is the spacing of the lattice translates of the
/// hyperplane along u (0 means no wrap identification).
pub(crate) fn in_slab(x: &[f64], u: &[f64], r0: f64, delta: f64, period: f64) -> bool {
    let t = linalg::dot(x, u) - r0;
    if period > 0.0 {
        let m = (t / period - (t / period).round()) * period;
        m.abs() <= delta
    } else {
        t.abs() <= delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{builtin, nn_laplacian, torus_wrap, TrigPoly};

    fn zero_model_d3() -> DispersionModel {
        DispersionModel::trig("zero", TrigPoly::constant_poly(3, 0.0))
    }

    fn cfg(samples: u64, p: f64, seed: u64) -> McConfig {
        McConfig {
            samples,
            strata_per_axis: 2,
            importance_weight: p,
            groups: 15,
            seed,
        }
    }

    #[test]
    fn crossing_zero_model_closed_forms() {
        let m = zero_model_d3();
        let q = ResolventQuery::new([0.0; 3], 1.0, torus_wrap(&[0.0; 3])).unwrap();
        let est = crossing_integral(&m, &q, &cfg(61_440, 0.5, 1)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        assert!(est.standard_error < 1e-12);

        let q = ResolventQuery::new([0.0; 3], 0.5, torus_wrap(&[0.0; 3])).unwrap();
        let est = crossing_integral(&m, &q, &cfg(61_440, 0.0, 2)).unwrap();
        assert!((est.value - 8.0).abs() < 1e-12);
    }

    #[test]
    fn resolvent_torus_constant_model() {
        // ω ≡ 0, α = 0.3, β = 0.4: 1/√(0.09+0.16) = 2.
        let m = zero_model_d3();
        let est = resolvent_torus(&m, 0.3, 0.4, 0.0, 0.0, &cfg(15_000, 0.0, 3)).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_d1_matches_tensor_trapezoid() {
        // d = 1, ω = 1 - cos 2πk, α = (1,1,1), k₀ = 0, β = 0.2.
        let m = nn_laplacian(1);
        let beta = 0.2;
        let alpha = [1.0, 1.0, 1.0];
        let n = 2048usize;
        let omega = |k: f64| 1.0 - (std::f64::consts::TAU * k).cos();
        let mut oracle = 0.0;
        for i in 0..n {
            let k1 = i as f64 / n as f64 - 0.5;
            for j in 0..n {
                let k2 = j as f64 / n as f64 - 0.5;
                let k3 = k1 - k2;
                oracle += 1.0
                    / ((alpha[0] - omega(k1)).hypot(beta)
                        * (alpha[1] - omega(k2)).hypot(beta)
                        * (alpha[2] - omega(k3)).hypot(beta));
            }
        }
        oracle /= (n * n) as f64;
        let q = ResolventQuery::new(alpha, beta, torus_wrap(&[0.0])).unwrap();
        let mc = crossing_integral(
            &m,
            &q,
            &McConfig {
                samples: 300_000,
                strata_per_axis: 8,
                importance_weight: 0.5,
                groups: 15,
                seed: 17,
            },
        )
        .unwrap();
        assert!(
            (mc.value - oracle).abs() <= 3.0 * mc.standard_error,
            "mc {} ± {} vs oracle {oracle}",
            mc.value,
            mc.standard_error
        );
    }

    #[test]
    fn f_omega_indicator_empties_above_sup() {
        let m = nn_laplacian(3);
        // sup |∇ω| = 2π√3 < 11; s = 12 empties the indicator.
        let est = f_omega(&m, 12.0, &cfg(15_000, 0.5, 4)).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn f_omega_trivial_cap() {
        let m = builtin("ce_morse_d3").unwrap();
        for s in [0.25, 0.0625] {
            let est = f_omega(&m, s, &cfg(60_000, 0.5, 5)).unwrap();
            assert!(est.value <= s.powi(-3));
            assert!(est.value > 0.0);
        }
    }

    #[test]
    fn cusp_and_domain_preconditions() {
        let sqrt_model = builtin("nn2d_sqrt").unwrap();
        // Weight without a gradient floor is refused on cusp models.
        match resolvent_torus(&sqrt_model, 1.0, 0.2, 0.5, 0.0, &cfg(15_000, 0.5, 1)) {
            Err(crate::LabError::CuspSingularity { .. }) => {}
            other => panic!("{other:?}"),
        }
        // A positive floor makes it well defined.
        assert!(resolvent_torus(&sqrt_model, 1.0, 0.2, 0.5, 0.05, &cfg(15_000, 0.5, 2)).is_ok());
        // f_omega needs s > 0.
        assert!(f_omega(&sqrt_model, 0.0, &cfg(15_000, 0.5, 3)).is_err());
    }

    #[test]
    fn slab_indicator_wraps() {
        let u = [1.0, 0.0, 0.0];
        assert!(in_slab(&[0.26, 0.4, 0.0], &u, 0.25, 0.02, 1.0));
        assert!(!in_slab(&[0.30, 0.4, 0.0], &u, 0.25, 0.02, 1.0));
        // Wraparound: x·u = -0.75 ≡ 0.25 (period 1).
        assert!(in_slab(&[-0.75, 0.0, 0.0], &u, 0.25, 0.02, 1.0));
    }
}
