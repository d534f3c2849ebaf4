//! The level-set chart: a local diffeomorphism ψ flattening the level sets
//! of ω into hyperplanes orthogonal to e₁.
//!
//! The forward map is explicit,
//!
//! ```text
//! φ(x) = ((ω(x) - ω(x₀)) / |∇ω(x₀)|) e₁ + O Q_{u₀}(x - x₀),   O u₀ = e₁,
//! ```
//!
//! with Jacobian Dφ(x) = O(1 + u₀ ⊗ f(x)), f(x) = (∇ω(x) - ∇ω(x₀))/|∇ω(x₀)|.
//! The inverse ψ = φ⁻¹ on B_{2λ} is computed by damped Newton iteration with
//! the closed-form Jacobian inverse; the pullback identity
//! ω(ψ(y)) = ω(x₀) + |∇ω(x₀)| y₁ then holds at the Newton residual level.

use crate::dispersion::{DispersionModel, ModelKind};
use crate::linalg;
use crate::{LabError, Result};

/// Damped-Newton settings for the chart inverse.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITERS: usize = 50;

/// A level-set chart around a non-critical base point.
#[derive(Clone, Debug)]
pub struct LevelChart {
    model: DispersionModel,
    x0: Vec<f64>,
    lambda: f64,
    grad_x0: Vec<f64>,
    grad_norm: f64,
    u0: Vec<f64>,
    /// Rotation A = Dψ(0), row-major, with A e₁ = u₀ (so O = Aᵀ).
    rot_a: Vec<f64>,
    newton_tol: f64,
}

/// Builds the chart at `x0` with radius `lambda`.
///
/// Requires a trigonometric-polynomial model, ∇ω(x₀) ≠ 0, and
/// λ ≤ |∇ω(x₀)| / (8 ‖ω‖′₂).
pub fn build_level_chart(model: &DispersionModel, x0: &[f64], lambda: f64) -> Result<LevelChart> {
    if model.kind() != ModelKind::TrigPoly {
        return Err(LabError::UnsupportedModel(
            "level charts require a trigonometric-polynomial model".into(),
        ));
    }
    let grad_x0 = model.gradient(x0)?;
    let grad_norm = linalg::norm(&grad_x0);
    if grad_norm < 1e-12 {
        return Err(LabError::ZeroGradient);
    }
    let m2 = model.smooth_norms(2)?.prime(2);
    let max_lambda = grad_norm / (8.0 * m2);
    if !(lambda > 0.0) || lambda > max_lambda * (1.0 + 1e-12) {
        return Err(LabError::RadiusTooLarge {
            lambda,
            max: max_lambda,
        });
    }
    let u0 = linalg::scaled(&grad_x0, 1.0 / grad_norm);
    let rot_a = linalg::rotation_e1_to(&u0);
    Ok(LevelChart {
        model: model.clone(),
        x0: x0.to_vec(),
        lambda,
        grad_x0,
        grad_norm,
        u0,
        rot_a,
        newton_tol: NEWTON_TOL,
    })
}

impl LevelChart {
    pub fn model(&self) -> &DispersionModel {
        &self.model
    }

    pub fn base_point(&self) -> &[f64] {
        &self.x0
    }

    pub fn radius(&self) -> f64 {
        self.lambda
    }

    pub fn gradient_norm(&self) -> f64 {
        self.grad_norm
    }

    pub fn direction(&self) -> &[f64] {
        &self.u0
    }

    /// A = Dψ(0), row-major; A e₁ = u₀.
    pub fn rotation(&self) -> &[f64] {
        &self.rot_a
    }

    pub fn newton_tolerance(&self) -> f64 {
        self.newton_tol
    }

    /// Base level ω(x₀).
    pub fn base_value(&self) -> f64 {
        self.model.eval(&self.x0)
    }

    /// Chart coordinate of the tangent direction: v' = Aᵀ v.
    pub fn pull_direction(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        linalg::matvec_t(&self.rot_a, v, &mut out);
        out
    }

    /// Forward map φ(x).
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let d = self.x0.len();
        let dx = linalg::sub(x, &self.x0);
        let along = linalg::dot(&self.u0, &dx);
        let mut q = dx;
        linalg::axpy(&mut q, -along, &self.u0);
        // O q = Aᵀ q; the first component of O q vanishes since q ⊥ u₀.
        let mut out = vec![0.0; d];
        linalg::matvec_t(&self.rot_a, &q, &mut out);
        out[0] += (self.model.eval(x) - self.base_value()) / self.grad_norm;
        out
    }

    fn deviation(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.model.inner().gradient(x);
        for (fi, g0) in f.iter_mut().zip(&self.grad_x0) {
            *fi = (*fi - g0) / self.grad_norm;
        }
        f
    }

    /// Inverse map ψ(y) by damped Newton on φ(x) = y.
    pub fn psi(&self, y: &[f64]) -> Result<Vec<f64>> {
        let d = self.x0.len();
        // Initial guess x₀ + A y (exact to first order at y = 0).
        let mut x = self.x0.clone();
        let mut ay = vec![0.0; d];
        linalg::matvec(&self.rot_a, y, &mut ay);
        linalg::axpy(&mut x, 1.0, &ay);

        let mut residual = linalg::sub(&self.forward(&x), y);
        let mut res_norm = linalg::norm(&residual);
        for _ in 0..NEWTON_MAX_ITERS {
            if res_norm < self.newton_tol {
                // Polish toward the rounding floor so ψ-based oracles are
                // not limited by the nominal tolerance.
                for _ in 0..3 {
                    let mut t = vec![0.0; d];
                    linalg::matvec(&self.rot_a, &residual, &mut t);
                    let f = self.deviation(&x);
                    let denom = 1.0 + linalg::dot(&f, &self.u0);
                    if denom.abs() < 1e-6 {
                        break;
                    }
                    let ft = linalg::dot(&f, &t);
                    let mut delta = t;
                    linalg::axpy(&mut delta, -ft / denom, &self.u0);
                    let mut cand = x.clone();
                    linalg::axpy(&mut cand, -1.0, &delta);
                    let cand_res = linalg::sub(&self.forward(&cand), y);
                    let cand_norm = linalg::norm(&cand_res);
                    if cand_norm < res_norm {
                        x = cand;
                        residual = cand_res;
                        res_norm = cand_norm;
                    } else {
                        break;
                    }
                }
                return Ok(x);
            }
            // Δ = Dφ(x)⁻¹ r = (1 - u₀⊗f/(1 + f·u₀)) Aᵀ... with A r first:
            let mut t = vec![0.0; d];
            linalg::matvec(&self.rot_a, &residual, &mut t);
            let f = self.deviation(&x);
            let denom = 1.0 + linalg::dot(&f, &self.u0);
            if denom.abs() < 1e-6 {
                return Err(LabError::NewtonDivergence(NEWTON_MAX_ITERS));
            }
            let ft = linalg::dot(&f, &t);
            let mut delta = t;
            linalg::axpy(&mut delta, -ft / denom, &self.u0);

            // Step halving on residual increase.
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let mut cand = x.clone();
                linalg::axpy(&mut cand, -step, &delta);
                let cand_res = linalg::sub(&self.forward(&cand), y);
                let cand_norm = linalg::norm(&cand_res);
                if cand_norm < res_norm {
                    x = cand;
                    residual = cand_res;
                    res_norm = cand_norm;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return Err(LabError::NewtonDivergence(NEWTON_MAX_ITERS));
            }
        }
        if res_norm < self.newton_tol {
            Ok(x)
        } else {
            Err(LabError::NewtonDivergence(NEWTON_MAX_ITERS))
        }
    }

    /// |det Dψ| at the chart point y (x = ψ(y) must be supplied).
    pub fn det_dpsi_at(&self, x: &[f64]) -> f64 {
        let f = self.deviation(x);
        1.0 / (1.0 + linalg::dot(&f, &self.u0)).abs()
    }

    /// The slope field g(x) = v·∇ω(x) / u₀·∇ω(x) of the level curve in
    /// direction v.
    pub fn slope(&self, v: &[f64], x: &[f64]) -> f64 {
        let g = self.model.inner().gradient(x);
        linalg::dot(v, &g) / linalg::dot(&self.u0, &g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{nn_laplacian, TWO_PI};
    use rand::Rng;

    fn chart_nn3() -> LevelChart {
        let m = nn_laplacian(3);
        let m2 = m.smooth_norms(2).unwrap().prime(2);
        let lambda = TWO_PI / (8.0 * m2);
        build_level_chart(&m, &[0.25, 0.0, 0.0], lambda).unwrap()
    }

    #[test]
    fn chart_base_point_fixed() {
        let c = chart_nn3();
        let x = c.psi(&[0.0, 0.0, 0.0]).unwrap();
        for (a, b) in x.iter().zip(c.base_point()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((c.gradient_norm() - TWO_PI).abs() < 1e-12);
    }

    #[test]
    fn pullback_identity_random_points() {
        let c = chart_nn3();
        let mut rng = crate::rngutil::stream_rng(11, crate::rngutil::Domain::Suite, 1);
        let base = c.base_value();
        for _ in 0..1000 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = 2.0 * c.radius() * rng.random::<f64>().powf(1.0 / 3.0)
                / crate::linalg::norm(&y).max(1e-300);
            let y: Vec<f64> = y.iter().map(|v| v * r.min(1.0)).collect();
            if crate::linalg::norm(&y) >= 2.0 * c.radius() {
                continue;
            }
            let x = c.psi(&y).unwrap();
            let lhs = c.model().eval(&x);
            let rhs = base + c.gradient_norm() * y[0];
            assert!(
                (lhs - rhs).abs() < 1e-10,
                "pullback residual {}",
                (lhs - rhs).abs()
            );
        }
    }

    #[test]
    fn determinant_within_stated_bounds() {
        let c = chart_nn3();
        let mut rng = crate::rngutil::stream_rng(12, crate::rngutil::Domain::Suite, 2);
        for _ in 0..500 {
            let mut y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = crate::linalg::norm(&y);
            let r: f64 = rng.random::<f64>();
            for v in y.iter_mut() {
                *v *= 2.0 * c.radius() * r / n.max(1e-300);
            }
            let x = c.psi(&y).unwrap();
            let det = c.det_dpsi_at(&x);
            assert!((2.0 / 3.0 - 1e-9..=2.0 + 1e-9).contains(&det), "det {det}");
        }
    }

    #[test]
    fn rejects_bad_radius_and_critical_points() {
        let m = nn_laplacian(3);
        match build_level_chart(&m, &[0.25, 0.0, 0.0], 10.0) {
            Err(LabError::RadiusTooLarge { .. }) => {}
            other => panic!("{other:?}"),
        }
        match build_level_chart(&m, &[0.0, 0.0, 0.0], 0.01) {
            Err(LabError::ZeroGradient) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn containment_both_directions() {
        let c = chart_nn3();
        let lam = c.radius();
        let mut rng = crate::rngutil::stream_rng(13, crate::rngutil::Domain::Suite, 3);
        for _ in 0..500 {
            // ψ(B_{2λ}) ⊆ x₀ + B_{4λ}
            let mut y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = crate::linalg::norm(&y);
            let r: f64 = rng.random::<f64>();
            for v in y.iter_mut() {
                *v *= 2.0 * lam * r / n.max(1e-300);
            }
            let x = c.psi(&y).unwrap();
            let dist = crate::linalg::norm(&crate::linalg::sub(&x, c.base_point()));
            assert!(dist < 4.0 * lam);
            // x₀ + B_λ ⊆ ψ(B_{2λ}): the forward image of B_λ stays in B_{2λ}
            let mut x2: Vec<f64> = c.base_point().to_vec();
            let mut dir: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dn = crate::linalg::norm(&dir);
            let rr: f64 = rng.random::<f64>();
            for v in dir.iter_mut() {
                *v *= lam * rr / dn.max(1e-300);
            }
            crate::linalg::axpy(&mut x2, 1.0, &dir);
            let y2 = c.forward(&x2);
            assert!(crate::linalg::norm(&y2) < 2.0 * lam);
        }
    }

    #[test]
    fn gradient_stability_on_chart() {
        let c = chart_nn3();
        let mut rng = crate::rngutil::stream_rng(14, crate::rngutil::Domain::Suite, 4);
        let g0 = c.model().gradient(c.base_point()).unwrap();
        for _ in 0..500 {
            let mut y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = crate::linalg::norm(&y);
            let r: f64 = rng.random::<f64>();
            for v in y.iter_mut() {
                *v *= 2.0 * c.radius() * r / n.max(1e-300);
            }
            let x = c.psi(&y).unwrap();
            let g = c.model().gradient(&x).unwrap();
            let diff = crate::linalg::norm(&crate::linalg::sub(&g, &g0));
            assert!(diff < 0.5 * c.gradient_norm());
        }
    }
}
