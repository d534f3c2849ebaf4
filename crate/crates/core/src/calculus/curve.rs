//! Level curves of the chart and the intrinsic curvature coefficients g̃_n.
//!
//! The level curve through ψ(y) in tangent direction v satisfies
//! dγ/dt = v - g(γ(t)) u₀ with g(x) = v·∇ω(x) / u₀·∇ω(x); the ODE itself
//! preserves the level set, so integration is projection-free. The
//! coefficients g̃_n are defined by a recursion over ordered compositions
//! and agree with (1/n!) dⁿ⁻¹/dtⁿ⁻¹ g(γ(t)) at t = 0, y = 0.

use super::chart::LevelChart;
use super::enumerate_compositions;
use crate::dispersion::{DispersionModel, ModelKind};
use crate::linalg;
use crate::{LabError, Result};

/// Local error tolerance of the embedded Runge-Kutta pair.
pub const ODE_LOCAL_TOL: f64 = 1e-10;

/// A sampled level curve γ(t) with the bending part Γ(t) = γ(t) - tv - ψ(y).
#[derive(Clone, Debug)]
pub struct LevelCurve {
    pub t: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub bending: Vec<Vec<f64>>,
    pub omega: Vec<f64>,
    pub start: Vec<f64>,
    pub v: Vec<f64>,
}

impl LevelCurve {
    /// CSV rows `t, γ₁..γ_d, ω(γ(t))`.
    pub fn to_csv(&self) -> String {
        let d = self.start.len();
        let mut out = String::from("t");
        for i in 1..=d {
            out.push_str(&format!(",gamma{i}"));
        }
        out.push_str(",omega\n");
        for (i, t) in self.t.iter().enumerate() {
            out.push_str(&format!("{t:.12e}"));
            for c in &self.gamma[i] {
                out.push_str(&format!(",{c:.12e}"));
            }
            out.push_str(&format!(",{:.12e}\n", self.omega[i]));
        }
        out
    }

    /// Largest |ω(γ(t)) - ω(γ(0))| along the samples.
    pub fn level_drift(&self) -> f64 {
        let base = self.omega[self.index_of_zero()];
        self.omega
            .iter()
            .map(|w| (w - base).abs())
            .fold(0.0, f64::max)
    }

    fn index_of_zero(&self) -> usize {
        self.t
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

// Dormand-Prince 5(4) pair.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rk_step(
    rhs: &impl Fn(&[f64], &mut [f64]),
    x: &[f64],
    h: f64,
    k1: &[f64],
) -> (Vec<f64>, Vec<f64>, f64) {
    let d = x.len();
    let mut k = vec![vec![0.0; d]; 7];
    k[0].copy_from_slice(k1);
    let mut stage = vec![0.0; d];
    for s in 0..6 {
        stage.copy_from_slice(x);
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            if DP_A[s][j] != 0.0 {
                linalg::axpy(&mut stage, h * DP_A[s][j], kj);
            }
        }
        let mut out = vec![0.0; d];
        rhs(&stage, &mut out);
        k[s + 1] = out;
    }
    let _ = DP_C;
    let mut x5 = x.to_vec();
    let mut err = vec![0.0; d];
    for (j, kj) in k.iter().enumerate() {
        if DP_B5[j] != 0.0 {
            linalg::axpy(&mut x5, h * DP_B5[j], kj);
        }
        let diff = DP_B5[j] - DP_B4[j];
        if diff != 0.0 {
            linalg::axpy(&mut err, h * diff, kj);
        }
    }
    let err_norm = linalg::norm(&err);
    // FSAL: k7 is the derivative at the accepted point.
    (x5, k[6].clone(), err_norm)
}

/// Integrates the level-curve ODE from γ(0) = ψ(y) and samples it at
/// `samples` uniform times over `t_span` (which must contain 0).
pub fn trace_level_curve(
    chart: &LevelChart,
    y: &[f64],
    v: &[f64],
    t_span: (f64, f64),
    samples: usize,
) -> Result<LevelCurve> {
    let d = chart.base_point().len();
    if (linalg::norm(v) - 1.0).abs() > 1e-10 {
        return Err(LabError::PreconditionViolated(
            "v must be a unit vector".into(),
        ));
    }
    if linalg::dot(v, chart.direction()).abs() > 1e-10 {
        return Err(LabError::PreconditionViolated(
            "v must be orthogonal to the chart direction".into(),
        ));
    }
    if linalg::norm(y) >= 2.0 * chart.radius() {
        return Err(LabError::PreconditionViolated(
            "start offset outside the chart ball".into(),
        ));
    }
    let (t0, t1) = t_span;
    if !(t0 <= 0.0 && t1 >= 0.0 && t1 > t0) {
        return Err(LabError::PreconditionViolated(
            "t_span must contain 0".into(),
        ));
    }
    // γ(t) = ψ(y + t v'), so the chart coordinate moves linearly; the exit
    // time out of B_{2λ} is explicit.
    let vprime = chart.pull_direction(v);
    for t in [t0, t1] {
        let mut yy = y.to_vec();
        linalg::axpy(&mut yy, t, &vprime);
        if linalg::norm(&yy) >= 2.0 * chart.radius() {
            return Err(LabError::LeftChart(t));
        }
    }

    let start = chart.psi(y)?;
    let rhs = |x: &[f64], out: &mut [f64]| {
        let g = chart.slope(v, x);
        for i in 0..x.len() {
            out[i] = v[i] - g * chart.direction()[i];
        }
    };

    let n = samples.max(2);
    let mut ts: Vec<f64> = (0..n)
        .map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64)
        .collect();
    // Make sure 0 itself is sampled.
    if !ts.iter().any(|t| t.abs() < 1e-15) {
        ts.push(0.0);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    let mut points = vec![Vec::new(); ts.len()];
    for (dir_sign, targets) in [
        (
            1.0,
            ts.iter()
                .enumerate()
                .filter(|(_, t)| **t >= 0.0)
                .collect::<Vec<_>>(),
        ),
        (-1.0, {
            let mut neg: Vec<_> = ts.iter().enumerate().filter(|(_, t)| **t < 0.0).collect();
            neg.reverse();
            neg
        }),
    ] {
        let mut x = start.clone();
        let mut t = 0.0f64;
        let mut k1 = vec![0.0; d];
        rhs(&x, &mut k1);
        let mut h: f64 = 1e-3 * dir_sign;
        for (idx, &target) in targets {
            while (target - t) * dir_sign > 1e-15 {
                let remaining = target - t;
                if h.abs() > remaining.abs() {
                    h = remaining;
                }
                let (x_new, k_new, err) = rk_step(&rhs, &x, h, &k1);
                if err <= ODE_LOCAL_TOL {
                    t += h;
                    x = x_new;
                    k1 = k_new;
                    let grow = if err > 0.0 {
                        (ODE_LOCAL_TOL / err).powf(0.2).min(5.0)
                    } else {
                        5.0
                    };
                    h *= 0.9 * grow;
                } else {
                    h *= (0.9 * (ODE_LOCAL_TOL / err).powf(0.25)).max(0.1);
                }
                if h.abs() < 1e-14 {
                    h = 1e-14 * dir_sign;
                }
            }
            points[idx] = x.clone();
        }
    }

    let gamma = points;
    let mut bending = Vec::with_capacity(gamma.len());
    let mut omega = Vec::with_capacity(gamma.len());
    for (i, t) in ts.iter().enumerate() {
        let mut b = linalg::sub(&gamma[i], &start);
        linalg::axpy(&mut b, -t, v);
        bending.push(b);
        omega.push(chart.model().eval(&gamma[i]));
    }
    Ok(LevelCurve {
        t: ts,
        gamma,
        bending,
        omega,
        start,
        v: v.to_vec(),
    })
}

/// The intrinsic curvature coefficients g̃₁ … g̃_N at (x₀, v).
#[derive(Clone, Debug)]
pub struct CurvatureSequence {
    pub x0: Vec<f64>,
    pub v: Vec<f64>,
    /// values[n-1] = g̃_n; g̃₁ = 0 by definition.
    pub values: Vec<f64>,
}

impl CurvatureSequence {
    pub fn gtilde(&self, n: usize) -> f64 {
        self.values[n - 1]
    }
}

/// Evaluates the recursion for g̃_n up to order `n_max` ≤ 10.
///
/// For n ≥ 2,
///
/// ```text
/// g̃_n |∇ω(x₀)| = Σ_{k=2}^{n} Σ_{m: composition of n into k parts}
///     [∏_{j<k} m_j/(m_j+…+m_k)] (∏_{j: m_j>1} g̃_{m_j})
///     (-u₀·∇)^{k-ℓ} (v·∇)^ℓ ω(x₀),    ℓ = #{j : m_j = 1},
/// ```
///
/// whose k = n term is (1/n!)(v·∇)ⁿω(x₀).
pub fn gtilde_sequence(
    model: &DispersionModel,
    x0: &[f64],
    v: &[f64],
    n_max: usize,
) -> Result<CurvatureSequence> {
    if model.kind() != ModelKind::TrigPoly {
        return Err(LabError::UnsupportedModel(
            "curvature coefficients require a trigonometric-polynomial model".into(),
        ));
    }
    if !(2..=10).contains(&n_max) {
        return Err(LabError::PreconditionViolated(format!(
            "n_max = {n_max} outside 2..=10"
        )));
    }
    let grad = model.gradient(x0)?;
    let grad_norm = linalg::norm(&grad);
    if grad_norm < 1e-12 {
        return Err(LabError::ZeroGradient);
    }
    let u0 = linalg::scaled(&grad, 1.0 / grad_norm);
    if (linalg::norm(v) - 1.0).abs() > 1e-10 || linalg::dot(v, &u0).abs() > 1e-10 {
        return Err(LabError::PreconditionViolated(
            "v must be a unit vector orthogonal to u₀".into(),
        ));
    }
    let minus_u0 = linalg::scaled(&u0, -1.0);
    let poly = model.inner();

    // Mixed derivatives D[k][ℓ] = (-u₀·∇)^{k-ℓ} (v·∇)^ℓ ω(x₀).
    let mut mixed = vec![vec![0.0; n_max + 1]; n_max + 1];
    for k in 1..=n_max {
        for l in 0..=k {
            let mut dirs: Vec<&[f64]> = Vec::with_capacity(k);
            for _ in 0..k - l {
                dirs.push(&minus_u0);
            }
            for _ in 0..l {
                dirs.push(v);
            }
            mixed[k][l] = poly.mixed_derivative(x0, &dirs);
        }
    }

    let mut values = vec![0.0; n_max];
    for n in 2..=n_max {
        let mut acc = 0.0;
        for k in 2..=n {
            for comp in enumerate_compositions(n, k) {
                let l = comp.parts.iter().filter(|&&m| m == 1).count();
                let mut prod = 1.0;
                for &m in comp.parts.iter().filter(|&&m| m > 1) {
                    prod *= values[m - 1];
                }
                acc += comp.weight * prod * mixed[k][l];
            }
        }
        values[n - 1] = acc / grad_norm;
    }
    Ok(CurvatureSequence {
        x0: x0.to_vec(),
        v: v.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::build_level_chart;
    use crate::dispersion::{nn_laplacian, TWO_PI};

    fn setup() -> (crate::dispersion::DispersionModel, Vec<f64>, Vec<f64>, f64) {
        let m = nn_laplacian(3);
        let m2 = m.smooth_norms(2).unwrap().prime(2);
        let lambda = TWO_PI / (8.0 * m2);
        (m, vec![0.25, 0.0, 0.0], vec![0.0, 1.0, 0.0], lambda)
    }

    #[test]
    fn gtilde_first_orders() {
        let (m, x0, v, _) = setup();
        let seq = gtilde_sequence(&m, &x0, &v, 6).unwrap();
        assert_eq!(seq.gtilde(1), 0.0);
        // g̃₂ = ½ (2π)⁻¹ (v·∇)²ω = π at this base point.
        assert!(
            (seq.gtilde(2) - std::f64::consts::PI).abs() < 1e-10,
            "g̃₂ = {}",
            seq.gtilde(2)
        );
    }

    #[test]
    fn level_curve_stays_on_level_set() {
        let (m, x0, v, lambda) = setup();
        let chart = build_level_chart(&m, &x0, lambda).unwrap();
        let span = 0.9 * 2.0 * lambda;
        let curve = trace_level_curve(&chart, &[0.0, 0.0, 0.0], &v, (-span, span), 41).unwrap();
        assert!(curve.level_drift() < 1e-8, "drift {}", curve.level_drift());
        // ω(1/4, 0, 0) = 1 - cos(π/2) = 1 for the d=3 NN Laplacian.
        assert!((curve.omega[0] - 1.0).abs() < 1e-9);
        // Γ(0) = 0.
        let i0 = curve.t.iter().position(|t| t.abs() < 1e-14).unwrap();
        assert!(linalg::norm(&curve.bending[i0]) < 1e-12);
    }

    #[test]
    fn curve_matches_chart_inverse() {
        let (m, x0, v, lambda) = setup();
        let chart = build_level_chart(&m, &x0, lambda).unwrap();
        let span = 0.8 * 2.0 * lambda;
        let curve = trace_level_curve(&chart, &[0.0, 0.0, 0.0], &v, (-span, span), 17).unwrap();
        let vprime = chart.pull_direction(&v);
        for (i, t) in curve.t.iter().enumerate() {
            let y: Vec<f64> = vprime.iter().map(|c| c * t).collect();
            let via_psi = chart.psi(&y).unwrap();
            let err = linalg::norm(&linalg::sub(&via_psi, &curve.gamma[i]));
            assert!(err < 1e-8, "t={t}: {err}");
        }
    }

    #[test]
    fn leaves_chart_error() {
        let (m, x0, v, lambda) = setup();
        let chart = build_level_chart(&m, &x0, lambda).unwrap();
        let too_far = 2.5 * lambda;
        match trace_level_curve(&chart, &[0.0, 0.0, 0.0], &v, (-too_far, too_far), 5) {
            Err(LabError::LeftChart(_)) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn endpoint_matches_1d_root_finding() {
        // From x₀ = (1/4, 0, 0) along v = e₂, root-find γ₁ on the level set
        // at fixed (γ₂, γ₃) and compare with the traced endpoint.
        let (m, x0, v, lambda) = setup();
        let chart = build_level_chart(&m, &x0, lambda).unwrap();
        let t_end = 0.8 * 2.0 * lambda;
        let curve = trace_level_curve(&chart, &[0.0, 0.0, 0.0], &v, (0.0, t_end), 9).unwrap();
        let last = curve.gamma.last().unwrap();
        let target = m.eval(&x0);
        let f = |x1: f64| m.eval(&[x1, last[1], last[2]]) - target;
        let (mut lo, mut hi) = (0.15, 0.3);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!(
            (root - last[0]).abs() < 1e-7,
            "root {root} vs curve {}",
            last[0]
        );
    }
}
