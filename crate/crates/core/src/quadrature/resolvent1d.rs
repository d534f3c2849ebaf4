//! Adaptive one-dimensional resolvent integrals ∫ dx / |f(x) - α + iβ|.
//!
//! Interval bisection is driven by a Gauss-Kronrod 7-15 error estimate,
//! with forced refinement wherever |f - α| < 10β so the Lorentzian spike is
//! resolved down to widths of order β.

use crate::{LabError, Result};

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Default subdivision cap.
pub const MAX_INTERVALS: usize = 400_000;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    near_spike: bool,
}

fn gk15(f: &impl Fn(f64) -> f64, alpha: f64, beta: f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    let mut min_dist = f64::INFINITY;
    // Odd-indexed XGK entries plus the center are the 7 Gauss nodes.
    for (i, (x, wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let pair = if *x == 0.0 {
            let dist = (f(center) - alpha).abs();
            min_dist = min_dist.min(dist);
            dist.hypot(beta).recip()
        } else {
            let d1 = (f(center - half * x) - alpha).abs();
            let d2 = (f(center + half * x) - alpha).abs();
            min_dist = min_dist.min(d1).min(d2);
            d1.hypot(beta).recip() + d2.hypot(beta).recip()
        };
        kronrod += wk * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs().max(1e-300),
        near_spike: min_dist < 10.0 * beta,
    }
}

/// Adaptive quadrature of ∫_a^b dx / |f(x) - α + iβ| to absolute accuracy
/// `tol` (estimated).
pub fn resolvent_1d(
    f: impl Fn(f64) -> f64,
    alpha: f64,
    beta: f64,
    range: (f64, f64),
    tol: f64,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(LabError::PreconditionViolated(format!(
            "beta = {beta} must be positive"
        )));
    }
    let (a, b) = range;
    if !(b > a) {
        return Err(LabError::PreconditionViolated("empty interval".into()));
    }
    let span = b - a;
    // Seed with enough pieces that no single GK panel straddles several
    // spikes of a wiggly f.
    let seeds = 8usize;
    let mut work: Vec<Segment> = (0..seeds)
        .map(|i| {
            let lo = a + span * i as f64 / seeds as f64;
            let hi = a + span * (i + 1) as f64 / seeds as f64;
            gk15(&f, alpha, beta, lo, hi)
        })
        .collect();
    let mut done: Vec<Segment> = Vec::new();
    let width_floor = |a: f64, b: f64| (b - a) < 1e-15 * (1.0 + a.abs() + b.abs());
    let mut splits = 0usize;
    while let Some(seg) = work.pop() {
        let width = seg.b - seg.a;
        let local_tol = tol * (width / span).max(1e-12);
        let must_split = seg.near_spike && width > 0.25 * beta;
        if (seg.error > 0.5 * local_tol || must_split) && !width_floor(seg.a, seg.b) {
            splits += 1;
            if splits > MAX_INTERVALS {
                return Err(LabError::BudgetExceeded(splits));
            }
            let mid = 0.5 * (seg.a + seg.b);
            work.push(gk15(&f, alpha, beta, seg.a, mid));
            work.push(gk15(&f, alpha, beta, mid, seg.b));
        } else {
            done.push(seg);
        }
    }
    // Deterministic summation order.
    done.sort_by(|s, t| s.a.partial_cmp(&t.a).unwrap());
    Ok(done.iter().map(|s| s.value).sum())
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// ∫_R dx / |P(x) + iβ| for a polynomial P of degree ≥ 2, by truncation at
/// a radius where the leading term dominates plus an analytic tail bound.
/// The result is an upper estimate of the integral (tail bounded above).
pub fn resolvent_line_poly(coeffs: &[f64], beta: f64, tol: f64) -> Result<f64> {
    let n = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(n) if n >= 2 => n,
        _ => {
            return Err(LabError::PreconditionViolated(
                "polynomial degree must be >= 2".into(),
            ))
        }
    };
    let an = coeffs[n].abs();
    let lower_sum: f64 = coeffs[..n].iter().map(|c| c.abs()).sum();
    // |P(x)| >= a_n |x|^n / 2 for |x| >= x_dominate.
    let x_dominate = (2.0 * lower_sum / an).max(1.0);
    // Tail cut so that the added bound stays within tol/2 when affordable,
    // capped at the truncation radius max(1e3, 1/(β tol)).
    let x_tail = (8.0 / (an * (n as f64 - 1.0) * tol)).powf(1.0 / (n as f64 - 1.0));
    let cap = (1.0 / (beta * tol)).max(1e3);
    let x_cut = x_dominate.max(1e3).max(x_tail.min(cap));
    let numeric = resolvent_1d(
        |x| poly_eval(&coeffs[..=n], x),
        0.0,
        beta,
        (-x_cut, x_cut),
        tol,
    )?;
    let tail_bound = 4.0 / (an * (n as f64 - 1.0) * x_cut.powi(n as i32 - 1));
    Ok(numeric + tail_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::sabs;

    #[test]
    fn constant_function_closed_form() {
        // f ≡ 0, α = 0 on (0,1): exact value 1/β.
        let v = resolvent_1d(|_| 0.0, 0.0, 0.5, (0.0, 1.0), 1e-9).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn linear_function_asinh_oracle() {
        // f(x) = x on (-1,1), α=0, β=1: 2 asinh(1).
        let v = resolvent_1d(|x| x, 0.0, 1.0, (-1.0, 1.0), 1e-9).unwrap();
        let want = 2.0 * 1f64.asinh();
        assert!((v - want).abs() < 1e-8, "{v} vs {want}");
    }

    #[test]
    fn sharp_spike_resolved() {
        // β = 1e-6 spike at x = 0.3; closed form (asinh) as oracle.
        let beta = 1e-6;
        let v = resolvent_1d(|x| x - 0.3, 0.0, beta, (0.0, 1.0), 1e-7).unwrap();
        let want = (0.7 / beta).asinh() + (0.3 / beta).asinh();
        assert!((v - want).abs() < 1e-5 * want, "{v} vs {want}");
    }

    #[test]
    fn quadratic_whole_line_bound() {
        // f(x) = x², β = 1: value ≤ 2(n+2)β^{1/n-1}/|a_n|^{1/n} with n = 2.
        let v = resolvent_line_poly(&[0.0, 0.0, 1.0], 1.0, 1e-6).unwrap();
        assert!(v <= 8.0, "{v}");
        // And the closed form ∫ dx/√(x⁴+1) ≈ 3.7081493: stay close.
        assert!((v - 3.70814935).abs() < 1e-4, "{v}");
    }

    #[test]
    fn linear_interval_bound_margin() {
        // Eq-style check: linear resolvent below 6⟨ln⟨λ a₁⟩⟩/|a₁|·⟨ln β⟩.
        for (a1, lambda, beta) in [(1.0, 1.0, 0.1), (0.3, 5.0, 0.01), (-2.0, 0.5, 0.5)] {
            let v = resolvent_1d(|x| a1 * x + 0.2, 0.0, beta, (-lambda, lambda), 1e-8).unwrap();
            let bound = 6.0 * sabs(sabs(lambda * a1).ln()) / (a1 as f64).abs() * sabs(beta.ln());
            assert!(v <= bound, "{v} > {bound}");
        }
    }
}
