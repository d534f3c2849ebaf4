//! Finite-difference oracles: Fornberg stencil weights on symmetric nodes
//! with Richardson extrapolation over halved steps.

/// Fornberg weights for the `order`-th derivative at z = 0 on `nodes`.
pub fn fd_weights(nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let m = order;
    // c[j][k]: weight of node j for derivative order k.
    let mut c = vec![vec![0.0f64; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// n-th derivative of f at t0 from a symmetric stencil at step h.
fn stencil_derivative(f: &impl Fn(f64) -> f64, t0: f64, n: usize, h: f64) -> f64 {
    // n+5 points keeps the truncation order at 4 or better.
    let half = (n + 4) / 2;
    let nodes: Vec<f64> = (-(half as i64)..=half as i64)
        .map(|i| i as f64 * h)
        .collect();
    let w = fd_weights(&nodes, n);
    nodes
        .iter()
        .zip(&w)
        .map(|(x, wi)| wi * f(t0 + x))
        .sum::<f64>()
}

/// n-th derivative by Richardson extrapolation over steps
/// {base, base/2, base/4}.
pub fn nth_derivative(f: impl Fn(f64) -> f64, t0: f64, n: usize, base_step: f64) -> f64 {
    let d0 = stencil_derivative(&f, t0, n, base_step);
    let d1 = stencil_derivative(&f, t0, n, base_step / 2.0);
    let d2 = stencil_derivative(&f, t0, n, base_step / 4.0);
    // Two extrapolation stages for the h⁴ and h⁶ error terms.
    let e0 = (16.0 * d1 - d0) / 15.0;
    let e1 = (16.0 * d2 - d1) / 15.0;
    (64.0 * e1 - e0) / 63.0
}

/// Single wide stencil (n + 2·extra + 1 nodes) at step h; preferred when f
/// carries solver noise that Richardson's shrinking steps would amplify.
pub fn nth_derivative_wide(f: impl Fn(f64) -> f64, t0: f64, n: usize, h: f64, extra: usize) -> f64 {
    let half = (n + 2 * extra).div_ceil(2);
    let nodes: Vec<f64> = (-(half as i64)..=half as i64)
        .map(|i| i as f64 * h)
        .collect();
    let w = fd_weights(&nodes, n);
    nodes
        .iter()
        .zip(&w)
        .map(|(x, wi)| wi * f(t0 + x))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_second_derivative_stencil() {
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(&nodes, 2);
        let want = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12, "{w:?}");
        }
    }

    #[test]
    fn high_order_trig_derivatives() {
        // f = sin(3t): f⁽ⁿ⁾(t₀) = 3ⁿ sin(3t₀ + nπ/2).
        let t0 = 0.37;
        for n in 1..=5usize {
            let exact =
                3f64.powi(n as i32) * (3.0 * t0 + n as f64 * std::f64::consts::FRAC_PI_2).sin();
            let approx = nth_derivative(|t| (3.0 * t).sin(), t0, n, 2e-2);
            // Rounding noise scales like ε/hⁿ, so high orders get more room.
            let tol = if n <= 3 { 1e-8 } else { 1e-5 };
            assert!(
                (approx - exact).abs() <= tol * (1.0 + exact.abs()),
                "n={n}: {approx} vs {exact}"
            );
        }
    }
}
