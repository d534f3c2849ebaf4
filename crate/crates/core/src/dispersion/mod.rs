//! Exact representation and differentiation of periodic dispersion
//! relations, torus geometry, and the bracket utility ⟨x⟩ = √(1+x²).
//!
//! A dispersion relation is stored as a trigonometric polynomial
//!
//! ```text
//! ω(x) = c₀ + Σ_m [ a_m cos(2π m·x) + b_m sin(2π m·x) ]
//! ```
//!
//! over integer frequency vectors m, or as the square root of such a
//! polynomial. All derivatives of the trigonometric form are exact: an
//! n-fold directional derivative multiplies each term by ∏ (2π m·v_k) and
//! rotates its (cos, sin) pair by n quarter periods.

mod dsl;

pub use dsl::{parse_model, DSL_GRAMMAR};

use crate::{LabError, Result};
use serde::{Deserialize, Serialize};

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Maximum exact derivative order; beyond this the (2π|m|)^n growth
/// exceeds double-precision usefulness.
pub const MAX_DERIVATIVE_ORDER: usize = 12;

/// Exclusion radius around detected zeros of the inner polynomial of a
/// square-root model.
pub const CUSP_EXCLUSION_RADIUS: f64 = 1e-6;

/// ⟨x⟩ = √(1+x²), the bracket used for all polylog bookkeeping.
#[inline]
pub fn sabs(x: f64) -> f64 {
    x.hypot(1.0)
}

/// Wraps one coordinate into [-1/2, 1/2).
#[inline]
pub fn wrap_coord(x: f64) -> f64 {
    let mut y = x - x.round();
    if y >= 0.5 {
        y -= 1.0;
    } else if y < -0.5 {
        y += 1.0;
    }
    y
}

/// A point of the unit torus, stored by its representative in [-1/2, 1/2)^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn wrap(coords: &[f64]) -> Self {
        TorusPoint(coords.iter().map(|&x| wrap_coord(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// Wraps a coordinate vector onto the torus.
pub fn torus_wrap(x: &[f64]) -> TorusPoint {
    TorusPoint::wrap(x)
}

/// d_T([a],[b]) = min over integer shifts n of |a - b + n|.
pub fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let w = wrap_coord(x - y);
            w * w
        })
        .sum::<f64>()
        .sqrt()
}

/// Integer lattice frequency of one trigonometric term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyVector(pub Vec<i64>);

impl FrequencyVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn euclid_norm(&self) -> f64 {
        self.0.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt()
    }

    /// Canonical representative of {m, -m}: first nonzero entry positive.
    /// Returns (canonical, flipped).
    fn canonicalize(mut self) -> (Self, bool) {
        let flip = matches!(self.0.iter().find(|&&k| k != 0), Some(&k) if k < 0);
        if flip {
            for k in self.0.iter_mut() {
                *k = -*k;
            }
        }
        (self, flip)
    }
}

/// One term a·cos(2π m·x) + b·sin(2π m·x).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigTerm {
    pub freq: FrequencyVector,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
    /// Cached 2π·m.
    #[serde(skip)]
    two_pi_freq: Vec<f64>,
}

impl TrigTerm {
    fn new(freq: FrequencyVector, cos_coeff: f64, sin_coeff: f64) -> Self {
        let two_pi_freq = freq.0.iter().map(|&k| TWO_PI * k as f64).collect();
        TrigTerm {
            freq,
            cos_coeff,
            sin_coeff,
            two_pi_freq,
        }
    }

    #[inline]
    fn phase(&self, x: &[f64]) -> f64 {
        self.two_pi_freq
            .iter()
            .zip(x)
            .map(|(w, xi)| w * xi)
            .sum::<f64>()
    }

    pub fn amplitude(&self) -> f64 {
        self.cos_coeff.hypot(self.sin_coeff)
    }
}

/// Value of (a, b) rotated by `quarter_turns` quarter periods at phase θ:
/// a·cos(θ + nπ/2) + b·sin(θ + nπ/2), computed without forming θ + nπ/2.
#[inline]
fn rotated_value(a: f64, b: f64, sin_t: f64, cos_t: f64, quarter_turns: usize) -> f64 {
    match quarter_turns % 4 {
        0 => a * cos_t + b * sin_t,
        1 => -a * sin_t + b * cos_t,
        2 => -a * cos_t - b * sin_t,
        _ => a * sin_t - b * cos_t,
    }
}

/// A real trigonometric polynomial on the d-torus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigPoly {
    dim: usize,
    constant: f64,
    terms: Vec<TrigTerm>,
}

impl TrigPoly {
    /// Builds a polynomial from (frequency, cos, sin) triples. Frequencies
    /// are canonicalized to the half-space with positive leading entry;
    /// duplicates and zero frequencies in the term list are rejected.
    pub fn new(dim: usize, constant: f64, terms: Vec<(Vec<i64>, f64, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidModel("dimension must be >= 1".into()));
        }
        let mut out: Vec<TrigTerm> = Vec::with_capacity(terms.len());
        for (m, a, b) in terms {
            if m.len() != dim {
                return Err(LabError::InvalidModel(format!(
                    "frequency {m:?} has length {} but dimension is {dim}",
                    m.len()
                )));
            }
            let fv = FrequencyVector(m);
            if fv.is_zero() {
                return Err(LabError::InvalidModel(
                    "zero frequency belongs in the constant".into(),
                ));
            }
            let (fv, flipped) = fv.canonicalize();
            let b = if flipped { -b } else { b };
            if out.iter().any(|t| t.freq == fv) {
                return Err(LabError::InvalidModel(format!(
                    "duplicate frequency {:?}",
                    fv.0
                )));
            }
            if !a.is_finite() || !b.is_finite() {
                return Err(LabError::InvalidModel("non-finite coefficient".into()));
            }
            out.push(TrigTerm::new(fv, a, b));
        }
        Ok(TrigPoly {
            dim,
            constant,
            terms: out,
        })
    }

    pub fn constant_poly(dim: usize, value: f64) -> Self {
        TrigPoly {
            dim,
            constant: value,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = self.constant;
        for t in &self.terms {
            let (s, c) = t.phase(x).sin_cos();
            acc += t.cos_coeff * c + t.sin_coeff * s;
        }
        acc
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for t in &self.terms {
            let (s, c) = t.phase(x).sin_cos();
            let deriv = rotated_value(t.cos_coeff, t.sin_coeff, s, c, 1);
            for (o, w) in out.iter_mut().zip(&t.two_pi_freq) {
                *o += w * deriv;
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn gradient_norm(&self, x: &[f64]) -> f64 {
        let mut g = [0.0; 8];
        let g = &mut g[..self.dim];
        g.fill(0.0);
        for t in &self.terms {
            let (s, c) = t.phase(x).sin_cos();
            let deriv = rotated_value(t.cos_coeff, t.sin_coeff, s, c, 1);
            for (o, w) in g.iter_mut().zip(&t.two_pi_freq) {
                *o += w * deriv;
            }
        }
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Row-major d×d Hessian.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut h = vec![0.0; d * d];
        for t in &self.terms {
            let (s, c) = t.phase(x).sin_cos();
            let deriv = rotated_value(t.cos_coeff, t.sin_coeff, s, c, 2);
            for r in 0..d {
                for col in 0..d {
                    h[r * d + col] += t.two_pi_freq[r] * t.two_pi_freq[col] * deriv;
                }
            }
        }
        h
    }

    /// Exact n-th directional derivative (v·∇)ⁿ ω(x).
    pub fn directional_derivative(&self, x: &[f64], v: &[f64], n: usize) -> f64 {
        if n == 0 {
            return self.eval(x);
        }
        let mut acc = 0.0;
        for t in &self.terms {
            let mv: f64 = t.two_pi_freq.iter().zip(v).map(|(w, vi)| w * vi).sum();
            let (s, c) = t.phase(x).sin_cos();
            acc += mv.powi(n as i32) * rotated_value(t.cos_coeff, t.sin_coeff, s, c, n);
        }
        acc
    }

    /// Exact mixed derivative ∏_j (w_j·∇) ω(x) over the direction list.
    pub fn mixed_derivative(&self, x: &[f64], dirs: &[&[f64]]) -> f64 {
        let k = dirs.len();
        if k == 0 {
            return self.eval(x);
        }
        let mut acc = 0.0;
        for t in &self.terms {
            let mut factor = 1.0;
            for w in dirs {
                factor *= t
                    .two_pi_freq
                    .iter()
                    .zip(*w)
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
            if factor == 0.0 {
                continue;
            }
            let (s, c) = t.phase(x).sin_cos();
            acc += factor * rotated_value(t.cos_coeff, t.sin_coeff, s, c, k);
        }
        acc
    }

    /// Rigorous frequency-sum bound Σ_m A_m (2π|m|)ⁿ on the n-th derivative
    /// operator norm (for n = 0 the constant is included).
    pub fn derivative_norm_bound(&self, n: usize) -> f64 {
        let mut acc = if n == 0 { self.constant.abs() } else { 0.0 };
        for t in &self.terms {
            acc += t.amplitude() * (TWO_PI * t.freq.euclid_norm()).powi(n as i32);
        }
        acc
    }
}

/// Upper estimates of the derivative sup-norms ‖ω‖′_n = sup_{0≤j≤n} ‖Dʲω‖_∞.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothNorms {
    pub order: usize,
    /// `sup_bounds[n]` bounds ‖ω‖′_n for n = 0..=order.
    pub sup_bounds: Vec<f64>,
}

impl SmoothNorms {
    /// ‖ω‖′_n upper estimate.
    pub fn prime(&self, n: usize) -> f64 {
        self.sup_bounds[n.min(self.order)]
    }
}

/// Kind tag of a dispersion model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    TrigPoly,
    SqrtOfTrigPoly,
}

/// A dispersion relation: a trigonometric polynomial or the square root of
/// a nonneqative one.
#[derive(Clone, Debug)]
pub struct DispersionModel {
    name: String,
    kind: ModelKind,
    inner: TrigPoly,
    /// Zeros of the inner polynomial (square-root models only): gradient
    /// queries within [`CUSP_EXCLUSION_RADIUS`] of these points are refused.
    cusp_points: Vec<Vec<f64>>,
}

impl DispersionModel {
    pub fn trig(name: impl Into<String>, poly: TrigPoly) -> Self {
        DispersionModel {
            name: name.into(),
            kind: ModelKind::TrigPoly,
            inner: poly,
            cusp_points: Vec::new(),
        }
    }

    /// Square root of `inner`. Verifies inner ≥ -1e-12 on a dense grid and
    /// locates the zeros of the inner polynomial.
    pub fn sqrt_of(name: impl Into<String>, inner: TrigPoly) -> Result<Self> {
        let d = inner.dim();
        let per_axis: usize = match d {
            1 => 4096,
            2 => 128,
            3 => 64,
            _ => 24,
        };
        let mut min_val = f64::INFINITY;
        let mut cusp_points = Vec::new();
        let mut x = vec![0.0; d];
        let total = per_axis.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            for xi in x.iter_mut() {
                *xi = (rem % per_axis) as f64 / per_axis as f64 - 0.5;
                rem /= per_axis;
            }
            let v = inner.eval(&x);
            min_val = min_val.min(v);
            if v < 1e-8 {
                if let Some(z) = polish_inner_zero(&inner, &x) {
                    if cusp_points
                        .iter()
                        .all(|p: &Vec<f64>| torus_distance(p, &z) > 1e-5)
                    {
                        cusp_points.push(z);
                    }
                }
            }
        }
        if min_val < -1e-12 {
            return Err(LabError::InvalidModel(format!(
                "inner polynomial dips to {min_val:.3e} on the verification grid"
            )));
        }
        Ok(DispersionModel {
            name: name.into(),
            kind: ModelKind::SqrtOfTrigPoly,
            inner,
            cusp_points,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn inner(&self) -> &TrigPoly {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn cusp_points(&self) -> &[Vec<f64>] {
        &self.cusp_points
    }

    fn require_trig(&self, what: &str) -> Result<()> {
        if self.kind == ModelKind::TrigPoly {
            Ok(())
        } else {
            Err(LabError::UnsupportedModel(format!(
                "{what} requires a trigonometric-polynomial model"
            )))
        }
    }

    fn check_cusp(&self, x: &[f64]) -> Result<f64> {
        let w = self.inner.eval(x);
        if w <= 1e-12
            || self
                .cusp_points
                .iter()
                .any(|p| torus_distance(p, x) < CUSP_EXCLUSION_RADIUS)
        {
            return Err(LabError::CuspSingularity { point: x.to_vec() });
        }
        Ok(w)
    }

    /// ω(x). Periodic in every coordinate.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            ModelKind::TrigPoly => self.inner.eval(x),
            ModelKind::SqrtOfTrigPoly => self.inner.eval(x).max(0.0).sqrt(),
        }
    }

    /// ∇ω(x); exact for trig polynomials, chain rule for square roots.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            ModelKind::TrigPoly => Ok(self.inner.gradient(x)),
            ModelKind::SqrtOfTrigPoly => {
                let w = self.check_cusp(x)?;
                let root = w.sqrt();
                let mut g = self.inner.gradient(x);
                for gi in g.iter_mut() {
                    *gi /= 2.0 * root;
                }
                Ok(g)
            }
        }
    }

    /// |∇ω(x)|, avoiding the gradient allocation for trig models.
    pub fn gradient_norm(&self, x: &[f64]) -> Result<f64> {
        match self.kind {
            ModelKind::TrigPoly => Ok(self.inner.gradient_norm(x)),
            ModelKind::SqrtOfTrigPoly => {
                let w = self.check_cusp(x)?;
                Ok(self.inner.gradient_norm(x) / (2.0 * w.sqrt()))
            }
        }
    }

    /// Row-major Hessian D²ω(x); exact for both kinds away from cusps.
    pub fn hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            ModelKind::TrigPoly => Ok(self.inner.hessian(x)),
            ModelKind::SqrtOfTrigPoly => {
                let w = self.check_cusp(x)?;
                let root = w.sqrt();
                let d = self.dim();
                let g = self.inner.gradient(x);
                let mut h = self.inner.hessian(x);
                for r in 0..d {
                    for c in 0..d {
                        h[r * d + c] = h[r * d + c] / (2.0 * root) - g[r] * g[c] / (4.0 * w * root);
                    }
                }
                Ok(h)
            }
        }
    }

    /// Exact (v·∇)ⁿω(x) for a unit direction v, n ≤ [`MAX_DERIVATIVE_ORDER`].
    pub fn directional_derivative(&self, x: &[f64], v: &[f64], n: usize) -> Result<f64> {
        if n > MAX_DERIVATIVE_ORDER {
            return Err(LabError::PreconditionViolated(format!(
                "derivative order {n} exceeds cap {MAX_DERIVATIVE_ORDER}"
            )));
        }
        let vnorm = crate::linalg::norm(v);
        if (vnorm - 1.0).abs() > 1e-12 {
            return Err(LabError::PreconditionViolated(format!(
                "direction norm {vnorm} is not 1"
            )));
        }
        match self.kind {
            ModelKind::TrigPoly => Ok(self.inner.directional_derivative(x, v, n)),
            ModelKind::SqrtOfTrigPoly if n <= 1 => {
                if n == 0 {
                    Ok(self.eval(x))
                } else {
                    Ok(crate::linalg::dot(v, &self.gradient(x)?))
                }
            }
            ModelKind::SqrtOfTrigPoly => Err(LabError::UnsupportedModel(
                "higher directional derivatives of a square-root model".into(),
            )),
        }
    }

    /// Derivative sup-norm upper estimates up to order `n`.
    pub fn smooth_norms(&self, n: usize) -> Result<SmoothNorms> {
        self.require_trig("smooth_norms")?;
        let mut sup_bounds = Vec::with_capacity(n + 1);
        let mut running: f64 = 0.0;
        for j in 0..=n {
            running = running.max(self.inner.derivative_norm_bound(j));
            sup_bounds.push(running);
        }
        Ok(SmoothNorms {
            order: n,
            sup_bounds,
        })
    }

    /// (min, max) of ω over a scan grid, padded by nothing; used to size
    /// α-scan boxes.
    pub fn value_range_estimate(&self) -> (f64, f64) {
        let d = self.dim();
        let per_axis: usize = match d {
            1 => 4096,
            2 => 96,
            3 => 48,
            _ => 16,
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut x = vec![0.0; d];
        for idx in 0..per_axis.pow(d as u32) {
            let mut rem = idx;
            for xi in x.iter_mut() {
                *xi = (rem % per_axis) as f64 / per_axis as f64 - 0.5;
                rem /= per_axis;
            }
            let v = self.eval(&x);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

fn polish_inner_zero(inner: &TrigPoly, start: &[f64]) -> Option<Vec<f64>> {
    let d = inner.dim();
    let mut x = start.to_vec();
    for _ in 0..60 {
        let g = inner.gradient(&x);
        let mut h = inner.hessian(&x);
        let mut rhs = g.clone();
        let step = crate::linalg::solve(&mut h, &mut rhs)?;
        let mut moved = 0.0;
        for i in 0..d {
            x[i] -= step[i];
            moved += step[i] * step[i];
        }
        if moved.sqrt() < 1e-14 {
            break;
        }
    }
    let x = torus_wrap(&x).into_coords();
    if inner.eval(&x).abs() < 1e-12 {
        Some(x)
    } else {
        None
    }
}

/// Built-in model lookup: zero, nn1, nn2, nn3, nn2d_sqrt, nn2d_squared,
/// ce_morse_d3.
pub fn builtin(name: &str) -> Option<DispersionModel> {
    match name {
        "zero" => Some(DispersionModel::trig(
            "zero",
            TrigPoly::constant_poly(3, 0.0),
        )),
        "nn1" => Some(nn_laplacian(1)),
        "nn2" => Some(nn_laplacian(2)),
        "nn3" => Some(nn_laplacian(3)),
        "nn2d_squared" => Some(DispersionModel::trig("nn2d_squared", nn2d_inner())),
        "nn2d_sqrt" => DispersionModel::sqrt_of("nn2d_sqrt", nn2d_inner()).ok(),
        "ce_morse_d3" => Some(ce_morse_d3()),
        _ => None,
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 7] = [
    "zero",
    "nn1",
    "nn2",
    "nn3",
    "nn2d_sqrt",
    "nn2d_squared",
    "ce_morse_d3",
];

/// ω(k) = Σ_ν (1 - cos 2πk_ν), the nearest-neighbor lattice Laplacian.
pub fn nn_laplacian(d: usize) -> DispersionModel {
    let terms = (0..d)
        .map(|nu| {
            let mut m = vec![0i64; d];
            m[nu] = 1;
            (m, -1.0, 0.0)
        })
        .collect();
    DispersionModel::trig(
        format!("nn{d}"),
        TrigPoly::new(d, d as f64, terms).expect("valid builtin"),
    )
}

fn nn2d_inner() -> TrigPoly {
    TrigPoly::new(
        2,
        2.0,
        vec![(vec![1, 0], -1.0, 0.0), (vec![0, 1], -1.0, 0.0)],
    )
    .expect("valid builtin")
}

/// ω(x) = 5 - cos(2πx₁)(3 + cos(2πx₂) + cos(2πx₃)): a Morse function that
/// is constant on the hyperplanes x₁ = ±1/4.
pub fn ce_morse_d3() -> DispersionModel {
    let terms = vec![
        (vec![1, 0, 0], -3.0, 0.0),
        (vec![1, 1, 0], -0.5, 0.0),
        (vec![1, -1, 0], -0.5, 0.0),
        (vec![1, 0, 1], -0.5, 0.0),
        (vec![1, 0, -1], -0.5, 0.0),
    ];
    DispersionModel::trig(
        "ce_morse_d3",
        TrigPoly::new(3, 5.0, terms).expect("valid builtin"),
    )
}

/// Randomized check of the bracket properties |x| < ⟨x⟩, monotonicity,
/// ⟨x+y⟩ < ⟨x⟩+⟨y⟩ ≤ 2⟨x⟩⟨y⟩, ⟨xy⟩ ≤ ⟨x⟩⟨y⟩ (and ≤ |x|⟨y⟩ when |x| ≥ 1).
pub fn bracket_property_suite(draws: u64, seed: u64) -> crate::verify::SuiteOutcome {
    use rand::Rng;
    let mut rng = crate::rngutil::stream_rng(seed, crate::rngutil::Domain::Suite, 0xB0);
    let mut violations = 0u64;
    let mut worst = f64::INFINITY;
    let mut check = |margin: f64| {
        worst = worst.min(margin);
        if margin < 0.0 {
            violations += 1;
        }
    };
    for _ in 0..draws {
        let x: f64 = rng.random_range(-50.0..50.0);
        let y: f64 = rng.random_range(-50.0..50.0);
        check(sabs(x) - x.abs());
        if x.abs() <= y.abs() {
            check(sabs(y) - sabs(x));
            check(sabs(sabs(y).ln()) - sabs(sabs(x).ln()));
        } else {
            check(sabs(x) - sabs(y));
            check(sabs(sabs(x).ln()) - sabs(sabs(y).ln()));
        }
        check(sabs(x) + sabs(y) - sabs(x + y));
        check(2.0 * sabs(x) * sabs(y) - (sabs(x) + sabs(y)));
        check(sabs(x) * sabs(y) - sabs(x * y));
        if x.abs() >= 1.0 {
            check(x.abs() * sabs(y) - sabs(x * y));
        }
    }
    crate::verify::SuiteOutcome {
        draws,
        violations,
        worst_margin: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rng() -> impl Rng {
        crate::rngutil::stream_rng(42, crate::rngutil::Domain::Suite, 999)
    }

    #[test]
    fn sabs_basics() {
        assert_eq!(sabs(0.0), 1.0);
        assert!((sabs(1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn torus_wrap_and_distance() {
        let p = torus_wrap(&[0.75, -0.5, 1.25]);
        assert!((p.coords()[0] - -0.25).abs() < 1e-15);
        assert!((p.coords()[1] - -0.5).abs() < 1e-15);
        assert!((p.coords()[2] - 0.25).abs() < 1e-15);
        let d = torus_distance(&[0.49], &[-0.49]);
        assert!((d - 0.02).abs() < 1e-12);
        // wrap is idempotent
        let q = torus_wrap(p.coords());
        assert_eq!(p, q);
    }

    #[test]
    fn ce_morse_values() {
        let m = ce_morse_d3();
        assert!((m.eval(&[0.25, 0.3, -0.2]) - 5.0).abs() < 1e-12);
        assert!((m.eval(&[0.5, 0.0, 0.0]) - 10.0).abs() < 1e-12);
        let g = m.gradient(&[0.0, 0.0, 0.0]).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        // Hessian at the origin: (2π)² diag(5, 1, 1).
        let h = m.hessian(&[0.0, 0.0, 0.0]).unwrap();
        let s = TWO_PI * TWO_PI;
        let want = [5.0 * s, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, s];
        for (a, b) in h.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn nn_laplacian_gradient() {
        let m = nn_laplacian(3);
        assert!(m.eval(&[0.0; 3]).abs() < 1e-15);
        let g = m.gradient(&[0.25, 0.0, 0.0]).unwrap();
        assert!((g[0] - TWO_PI).abs() < 1e-12);
        assert!(g[1].abs() < 1e-15 && g[2].abs() < 1e-15);
    }

    #[test]
    fn periodicity_random_shifts() {
        let models = [ce_morse_d3(), nn_laplacian(3)];
        let mut r = rng();
        for m in &models {
            for _ in 0..2000 {
                let x: Vec<f64> = (0..3).map(|_| r.random_range(-0.5..0.5)).collect();
                let shift: Vec<f64> = (0..3).map(|_| r.random_range(-3i64..=3) as f64).collect();
                let y: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
                let fx = m.eval(&x);
                let fy = m.eval(&y);
                assert!((fx - fy).abs() <= 1e-12 * (1.0 + fx.abs()));
            }
        }
    }

    #[test]
    fn sqrt_model_refuses_higher_directional_derivatives() {
        let m = builtin("nn2d_sqrt").unwrap();
        let v = [1.0, 0.0];
        assert!(m.directional_derivative(&[0.2, 0.1], &v, 1).is_ok());
        match m.directional_derivative(&[0.2, 0.1], &v, 2) {
            Err(LabError::UnsupportedModel(_)) => {}
            other => panic!("expected unsupported-model error, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_model_cusp_and_lipschitz_access() {
        let m = builtin("nn2d_sqrt").unwrap();
        assert_eq!(m.kind(), ModelKind::SqrtOfTrigPoly);
        assert_eq!(m.cusp_points().len(), 1);
        match m.gradient(&[0.0, 0.0]) {
            Err(LabError::CuspSingularity { .. }) => {}
            other => panic!("expected cusp error, got {other:?}"),
        }
        // Away from the cusp the chain rule applies.
        let g = m.gradient(&[0.25, 0.1]).unwrap();
        let inner = m.inner();
        let gi = inner.gradient(&[0.25, 0.1]);
        let w = inner.eval(&[0.25, 0.1]);
        for i in 0..2 {
            assert!((g[i] - gi[i] / (2.0 * w.sqrt())).abs() < 1e-13);
        }
    }

    #[test]
    fn directional_derivative_order_one_matches_gradient() {
        let m = ce_morse_d3();
        let mut r = rng();
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| r.random_range(-0.5..0.5)).collect();
            let mut v: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
            let n = crate::linalg::norm(&v);
            v.iter_mut().for_each(|vi| *vi /= n);
            let dd = m.directional_derivative(&x, &v, 1).unwrap();
            let g = m.gradient(&x).unwrap();
            let vd = crate::linalg::dot(&v, &g);
            assert!((dd - vd).abs() <= 1e-12 * (1.0 + vd.abs()));
        }
    }

    #[test]
    fn odd_directional_derivative_of_even_term_vanishes() {
        let p = TrigPoly::new(1, 1.0, vec![(vec![1], -1.0, 0.0)]).unwrap();
        let m = DispersionModel::trig("cosine", p);
        let v = [1.0];
        let val = m.directional_derivative(&[0.0], &v, 3).unwrap();
        assert!(val.abs() < 1e-12);
    }

    #[test]
    fn second_directional_derivative_at_quarter_point() {
        // (e₂·∇)² of Σ(1 - cos 2πk_ν) at (1/4, 0, 0) is (2π)² cos 0 = 4π².
        let m = nn_laplacian(3);
        let val = m
            .directional_derivative(&[0.25, 0.0, 0.0], &[0.0, 1.0, 0.0], 2)
            .unwrap();
        let want = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        assert!((val - want).abs() < 1e-10, "{val} vs {want}");
        // Hessian at the origin is 4π²·identity.
        let h = m.hessian(&[0.0; 3]).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { want } else { 0.0 };
                assert!((h[r * 3 + c] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn norm_bound_monotone_in_order() {
        // All builtin frequencies have 2π|m| ≥ 1, so the per-order bound
        // is nondecreasing.
        let m = nn_laplacian(3);
        let mut prev = m.inner().derivative_norm_bound(1);
        for n in 2..=6 {
            let b = m.inner().derivative_norm_bound(n);
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn hessian_symmetry() {
        let m = ce_morse_d3();
        let mut r = rng();
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| r.random_range(-0.5..0.5)).collect();
            let h = m.hessian(&x).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    assert_eq!(h[a * 3 + b], h[b * 3 + a]);
                }
            }
        }
    }

    #[test]
    fn smooth_norm_bounds() {
        let m = nn_laplacian(3);
        let norms = m.smooth_norms(3).unwrap();
        // ‖ω‖′₁ ≤ 3·2π, and it must dominate the true sup 2π√3.
        assert!(norms.prime(1) <= 3.0 * TWO_PI + 1e-12);
        assert!(norms.prime(1) >= TWO_PI * 3f64.sqrt());
        // constant model: all derivative norms vanish
        let c = DispersionModel::trig("c", TrigPoly::constant_poly(2, 4.0));
        let n = c.smooth_norms(3).unwrap();
        assert_eq!(n.sup_bounds[1], 4.0); // order ≥ 1 bound is the order-0 sup
        assert_eq!(c.inner().derivative_norm_bound(2), 0.0);
    }

    #[test]
    fn duplicate_and_zero_frequencies_rejected() {
        assert!(TrigPoly::new(2, 0.0, vec![(vec![0, 0], 1.0, 0.0)]).is_err());
        assert!(TrigPoly::new(
            2,
            0.0,
            vec![(vec![1, 0], 1.0, 0.0), (vec![-1, 0], 0.5, 0.0)]
        )
        .is_err());
    }

    #[test]
    fn bracket_suite_clean() {
        let out = bracket_property_suite(100_000, 7);
        assert_eq!(out.violations, 0);
        assert!(out.worst_margin >= 0.0);
    }
}
