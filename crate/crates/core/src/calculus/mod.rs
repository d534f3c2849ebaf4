//! Differential-geometric machinery: composite derivatives of curves, the
//! level-set chart, level curves, the curvature-coefficient recursion, and
//! the ν-selection rule.

mod chart;
mod curve;

pub use chart::{build_level_chart, LevelChart};
pub use curve::{gtilde_sequence, trace_level_curve, CurvatureSequence, LevelCurve};

use crate::verify::SuiteOutcome;
use crate::{LabError, Result};

/// One ordered composition of n into k positive parts, with the weight
/// ∏_{j<k} m_j / (m_j + m_{j+1} + … + m_k).
#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    pub parts: Vec<usize>,
    pub weight: f64,
}

fn composition_weight(parts: &[usize]) -> f64 {
    let k = parts.len();
    let mut suffix: usize = parts.iter().sum();
    let mut w = 1.0;
    for &m in parts.iter().take(k - 1) {
        w *= m as f64 / suffix as f64;
        suffix -= m;
    }
    w
}

/// All compositions of n into exactly k positive parts, in lexicographic
/// order of the part vector. There are C(n-1, k-1) of them.
pub fn enumerate_compositions(n: usize, k: usize) -> Vec<Composition> {
    assert!(k >= 1 && k <= n && n <= 12, "need 1 <= k <= n <= 12");
    let mut out = Vec::new();
    let mut parts = vec![0usize; k];
    fn rec(remaining: usize, slot: usize, parts: &mut Vec<usize>, out: &mut Vec<Composition>) {
        let k = parts.len();
        if slot == k - 1 {
            parts[slot] = remaining;
            out.push(Composition {
                parts: parts.clone(),
                weight: composition_weight(parts),
            });
            return;
        }
        let slots_left = k - slot - 1;
        for m in 1..=remaining - slots_left {
            parts[slot] = m;
            rec(remaining - m, slot + 1, parts, out);
        }
    }
    rec(n, 0, &mut parts, &mut out);
    out
}

/// A field that can evaluate exact mixed directional derivatives
/// ∏_j (w_j·∇) f at a point (an empty direction list evaluates f itself).
pub trait SmoothField {
    fn dim(&self) -> usize;
    fn mixed_derivative(&self, x: &[f64], dirs: &[&[f64]]) -> f64;
}

impl SmoothField for crate::dispersion::TrigPoly {
    fn dim(&self) -> usize {
        crate::dispersion::TrigPoly::dim(self)
    }
    fn mixed_derivative(&self, x: &[f64], dirs: &[&[f64]]) -> f64 {
        crate::dispersion::TrigPoly::mixed_derivative(self, x, dirs)
    }
}

/// (1/n!) dⁿ/dtⁿ f(Γ(t)) from the curve derivatives Γ⁽¹⁾ … Γ⁽ⁿ⁾ at t.
///
/// `curve_derivs[j-1]` holds Γ⁽ʲ⁾(t), unscaled; `point` is Γ(t).
pub fn composite_derivative(
    f: &dyn SmoothField,
    point: &[f64],
    curve_derivs: &[Vec<f64>],
    n: usize,
) -> Result<f64> {
    if n == 0 || n > crate::dispersion::MAX_DERIVATIVE_ORDER {
        return Err(LabError::PreconditionViolated(format!(
            "order {n} outside 1..={}",
            crate::dispersion::MAX_DERIVATIVE_ORDER
        )));
    }
    if curve_derivs.len() < n {
        return Err(LabError::PreconditionViolated(format!(
            "need {n} curve derivatives, got {}",
            curve_derivs.len()
        )));
    }
    // Scaled derivatives Γ⁽ʲ⁾/j!.
    let mut scaled: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut factorial = 1.0;
    for (j, d) in curve_derivs.iter().take(n).enumerate() {
        factorial *= (j + 1) as f64;
        scaled.push(d.iter().map(|x| x / factorial).collect());
    }
    let mut acc = 0.0;
    for k in 1..=n {
        for comp in enumerate_compositions(n, k) {
            let dirs: Vec<&[f64]> = comp
                .parts
                .iter()
                .map(|&m| scaled[m - 1].as_slice())
                .collect();
            acc += comp.weight * f.mixed_derivative(point, &dirs);
        }
    }
    Ok(acc)
}

/// Fixed test order for ν; mirrors the case split of the selection rule.
pub const NU_CANDIDATES: [f64; 4] = [1.0, 2.0, 0.0, -1.0];

/// First ν among (1, 2, 0, -1) with |νⁿ a + (1-ν)ⁿ b + c| ≥ ε'/2.
///
/// Requires n ≥ 2 and |c| ≥ ε' > 0; a qualifying ν always exists.
pub fn select_nu(n: usize, a: f64, b: f64, c: f64, eps_prime: f64) -> Result<f64> {
    if n < 2 {
        return Err(LabError::PreconditionViolated(format!("n = {n} < 2")));
    }
    if !(eps_prime > 0.0) || c.abs() < eps_prime {
        return Err(LabError::PreconditionViolated(format!(
            "|c| = {} below eps' = {eps_prime}",
            c.abs()
        )));
    }
    for nu in NU_CANDIDATES {
        if nu_objective(n, a, b, c, nu) >= eps_prime / 2.0 {
            return Ok(nu);
        }
    }
    Err(LabError::PreconditionViolated(
        "no candidate ν met the bound".into(),
    ))
}

fn nu_objective(n: usize, a: f64, b: f64, c: f64, nu: f64) -> f64 {
    (nu.powi(n as i32) * a + (1.0 - nu).powi(n as i32) * b + c).abs()
}

/// Randomized suite: the selected ν always satisfies the half-ε' bound and
/// stays in the admissible range |ν|, |1-ν| ≤ 2.
pub fn nu_selection_suite(draws: u64, seed: u64) -> SuiteOutcome {
    use rand::Rng;
    let mut rng = crate::rngutil::stream_rng(seed, crate::rngutil::Domain::Suite, 0x9D);
    let mut violations = 0u64;
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let n = rng.random_range(2..=6usize);
        let a: f64 = rng.random_range(-10.0..10.0);
        let b: f64 = rng.random_range(-10.0..10.0);
        let eps: f64 = rng.random_range(0.01..4.0);
        let mag: f64 = rng.random_range(0.0f64..6.0);
        let c = (eps + mag) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        match select_nu(n, a, b, c, eps) {
            Ok(nu) => {
                let margin = (nu_objective(n, a, b, c, nu) - eps / 2.0)
                    .min(2.0 - nu.abs())
                    .min(2.0 - (1.0 - nu).abs());
                worst = worst.min(margin);
                if margin < 0.0 {
                    violations += 1;
                }
            }
            Err(_) => violations += 1,
        }
    }
    SuiteOutcome {
        draws,
        violations,
        worst_margin: worst,
    }
}
