//! Randomized property suites for the basic estimate lemmas and the
//! one-dimensional resolvent bounds.

use crate::dispersion::{sabs, DispersionModel, TrigPoly};
use crate::quadrature::{resolvent_1d, resolvent_line_poly};
use crate::rngutil::{stream_rng, Domain};
use crate::verify::SuiteOutcome;
use crate::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn outcome(draws: u64, violations: u64, worst: f64) -> SuiteOutcome {
    SuiteOutcome {
        draws,
        violations,
        worst_margin: worst,
    }
}

/// Random trigonometric polynomial with small support, for lemma suites.
pub(crate) fn random_trig_poly(rng: &mut ChaCha8Rng, dim: usize, max_terms: usize) -> TrigPoly {
    loop {
        let n_terms = rng.random_range(1..=max_terms);
        let mut terms: Vec<(Vec<i64>, f64, f64)> = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let m: Vec<i64> = (0..dim).map(|_| rng.random_range(-2..=2)).collect();
            if m.iter().all(|&k| k == 0) {
                continue;
            }
            terms.push((m, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        }
        if terms.is_empty() {
            continue;
        }
        // Canonicalization may collide duplicate frequencies; retry then.
        if let Ok(p) = TrigPoly::new(dim, rng.random_range(-1.0..1.0), terms) {
            return p;
        }
    }
}

/// 1/|x+h+iβ| ≤ (μ+⟨μ⟩)/|x+iβ| whenever |h| ≤ 2μβ.
pub fn delbeta_suite(draws: u64, seed: u64) -> SuiteOutcome {
    let mut rng = stream_rng(seed, Domain::Suite, 0xD0);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let beta = 10f64.powf(rng.random_range(-4.0..0.0));
        let mu = 10f64.powf(rng.random_range(-2.0..1.0));
        let x: f64 = rng.random_range(-10.0..10.0);
        let h = rng.random_range(-1.0..1.0) * 2.0 * mu * beta;
        let lhs = 1.0 / (x + h).hypot(beta);
        let rhs = (mu + sabs(mu)) / x.hypot(beta);
        let margin = rhs - lhs;
        worst = worst.min(margin);
        if margin < 0.0 {
            violations += 1;
        }
    }
    outcome(draws, violations, worst)
}

/// ∫_β¹ ⟨ln s⟩^p / s ds ≤ ⟨ln β⟩^{p+1}, numerically via y = -ln s.
pub fn lnsint_suite(draws: u64, seed: u64) -> SuiteOutcome {
    let mut rng = stream_rng(seed, Domain::Suite, 0xD1);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let p = rng.random_range(0..=3);
        let beta = 10f64.powf(rng.random_range(-6.0..0.0));
        let upper = -beta.ln();
        // Composite Simpson on the smooth transformed integrand ⟨y⟩^p.
        let panels = 2048;
        let h = upper / panels as f64;
        let mut integral = sabs(0.0).powi(p) + sabs(upper).powi(p);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            integral += w * sabs(i as f64 * h).powi(p);
        }
        integral *= h / 3.0;
        let bound = sabs(beta.ln()).powi(p + 1);
        let margin = bound - integral;
        worst = worst.min(margin);
        if margin < -1e-9 * bound {
            violations += 1;
        }
    }
    outcome(draws, violations, worst)
}

/// Argument-shift bound with a = 1/9 on random trigonometric polynomials.
pub fn idshift_suite(draws: u64, seed: u64) -> SuiteOutcome {
    let mut rng = stream_rng(seed, Domain::Suite, 0xD2);
    let a = 1.0 / 9.0;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut drawn = 0u64;
    while drawn < draws {
        let dim = rng.random_range(2..=3usize);
        let poly = random_trig_poly(&mut rng, dim, 4);
        let model = DispersionModel::trig("suite", poly);
        let norms = model.smooth_norms(2).expect("trig model");
        let m1 = norms.prime(1).max(1e-9);
        let m2 = norms.prime(2).max(1e-9);
        for _ in 0..100.min(draws - drawn) {
            drawn += 1;
            let s = rng.random_range(1e-3..1.0) * m1;
            let p = rng.random_range(0.0..3.0);
            let lambda = a * s / m2;
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
            let mut dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dn = crate::linalg::norm(&dir).max(1e-12);
            let r = rng.random::<f64>() * lambda;
            let x: Vec<f64> = y
                .iter()
                .zip(&dir)
                .map(|(yi, di)| yi + di / dn * r * 0.999)
                .collect();
            dir.clear();
            let gy = model.gradient_norm(&y).expect("trig model");
            if gy < s {
                continue; // left indicator empty: inequality trivial
            }
            let gx = model.gradient_norm(&x).expect("trig model");
            let lhs = gy.powf(-p);
            let rhs = if gx >= (1.0 - a) * s {
                (1.0 + a).powf(p) * gx.powf(-p)
            } else {
                0.0
            };
            let margin = rhs - lhs;
            worst = worst.min(margin);
            if margin < -1e-12 * lhs.abs() {
                violations += 1;
            }
        }
    }
    outcome(drawn, violations, worst)
}

/// |∇ω(x) - ∇ω(x₀)| ≤ a|∇ω(x₀)| whenever |x-x₀| ≤ a|∇ω(x₀)|/M₂.
pub fn nablaomdiff_suite(draws: u64, seed: u64) -> SuiteOutcome {
    let mut rng = stream_rng(seed, Domain::Suite, 0xD3);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut drawn = 0u64;
    while drawn < draws {
        let dim = rng.random_range(2..=3usize);
        let poly = random_trig_poly(&mut rng, dim, 4);
        let model = DispersionModel::trig("suite", poly);
        let m2 = model
            .smooth_norms(2)
            .expect("trig model")
            .prime(2)
            .max(1e-9);
        for _ in 0..100.min(draws - drawn) {
            drawn += 1;
            let a = rng.random_range(0.01..1.0);
            let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
            let g0 = model.gradient(&x0).expect("trig model");
            let g0n = crate::linalg::norm(&g0);
            let radius = a * g0n / m2;
            let mut dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dn = crate::linalg::norm(&dir).max(1e-12);
            for di in dir.iter_mut() {
                *di /= dn;
            }
            let r = rng.random::<f64>() * radius;
            let x: Vec<f64> = x0.iter().zip(&dir).map(|(xi, di)| xi + di * r).collect();
            let g = model.gradient(&x).expect("trig model");
            let diff = crate::linalg::norm(&crate::linalg::sub(&g, &g0));
            let margin = a * g0n - diff;
            worst = worst.min(margin);
            if margin < -1e-10 * (1.0 + g0n) {
                violations += 1;
            }
        }
    }
    outcome(drawn, violations, worst)
}

/// Whole-line polynomial bound 2(n+2)|a_n|^{-1/n} β^{1/n-1}.
pub fn pnint_suite(draws: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = stream_rng(seed, Domain::Suite, 0xD4);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let n = rng.random_range(2..=5usize);
        let mut coeffs: Vec<f64> = (0..=n).map(|_| rng.random_range(-2.0..2.0)).collect();
        while coeffs[n].abs() < 0.2 {
            coeffs[n] = rng.random_range(-2.0..2.0);
        }
        let beta = 10f64.powf(rng.random_range(-3.0..0.0));
        let bound = 2.0 * (n as f64 + 2.0) / coeffs[n].abs().powf(1.0 / n as f64)
            * beta.powf(1.0 / n as f64 - 1.0);
        let tol = 1e-6 * bound;
        let value = resolvent_line_poly(&coeffs, beta, 1e-6)?;
        let margin = bound + tol - value;
        worst = worst.min(margin / bound);
        if margin < 0.0 {
            violations += 1;
        }
    }
    Ok(outcome(draws, violations, worst))
}

/// Linear-resolvent bound 6⟨ln⟨λa₁⟩⟩ |a₁|⁻¹ ⟨ln β⟩ on |x-x₀| ≤ λ.
pub fn pnintn1_suite(draws: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = stream_rng(seed, Domain::Suite, 0xD5);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let a1 = rng.random_range(0.05..3.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let a0 = rng.random_range(-3.0..3.0);
        let x0 = rng.random_range(-5.0..5.0);
        let lambda = rng.random_range(0.1..10.0);
        let beta = 10f64.powf(rng.random_range(-4.0..0.0));
        let bound = 6.0 * sabs(sabs(lambda * a1).ln()) / a1.abs() * sabs(beta.ln());
        let value = resolvent_1d(
            |x| a0 + a1 * x,
            0.0,
            beta,
            (x0 - lambda, x0 + lambda),
            1e-6 * bound,
        )?;
        let margin = bound * (1.0 + 1e-6) - value;
        worst = worst.min(margin / bound);
        if margin < 0.0 {
            violations += 1;
        }
    }
    Ok(outcome(draws, violations, worst))
}

/// Monotone-f bound 6⟨ln⟨m₀⟩⟩ ε₀⁻¹ ⟨ln β⟩ for |f'| ≥ ε₀ on the interval.
pub fn fgenintn1_suite(draws: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = stream_rng(seed, Domain::Suite, 0xD6);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let c: f64 = rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let freq = rng.random_range(0.5..4.0);
        let amp = rng.random_range(0.0..0.8) * c.abs() / freq;
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let eps0 = c.abs() - amp * freq;
        let a = rng.random_range(-3.0..3.0);
        let b = a + rng.random_range(0.5..6.0);
        let f = move |x: f64| c * x + amp * (freq * x + phase).sin();
        // Grid lower estimate of m₀ = sup |f| (understimating m₀ only
        // tightens the asserted bound).
        let m0 = (0..=1024)
            .map(|i| f(a + (b - a) * i as f64 / 1024.0).abs())
            .fold(0.0f64, f64::max);
        let alpha = rng.random_range(-1.2..1.2) * m0;
        let beta = 10f64.powf(rng.random_range(-5.0..0.0));
        let bound = 6.0 * sabs(sabs(m0).ln()) / eps0 * sabs(beta.ln());
        let value = resolvent_1d(f, alpha, beta, (a, b), 1e-6 * bound)?;
        let margin = bound * (1.0 + 1e-6) - value;
        worst = worst.min(margin / bound);
        if margin < 0.0 {
            violations += 1;
        }
    }
    Ok(outcome(draws, violations, worst))
}

/// Higher-order bound C_{n₀}((b-a)ε₀⁻¹ β^{1/(n₀+1)-1} + M ε₀^{-1/n₀} β^{1/n₀-1})
/// for |f^{(n₀)}| ≥ n₀! ε₀, valid once β ≤ (ε')^{n₀+1} with
/// ε' = ε₀/(M C_{n₀}).
pub fn fgenint_suite(draws: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = stream_rng(seed, Domain::Suite, 0xD7);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let n0 = rng.random_range(2..=3usize);
        // Degree n₀+1 with a dominant a_{n₀}: ε₀ and m₀ are then explicit.
        let mut coeffs = vec![0.0f64; n0 + 2];
        for c in coeffs.iter_mut().take(n0) {
            *c = rng.random_range(-1.0..1.0);
        }
        let lead_cap = if n0 == 2 { 0.1 } else { 0.05 };
        coeffs[n0] = rng.random_range(1.0..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        coeffs[n0 + 1] = rng.random_range(-lead_cap..lead_cap);
        let a: f64 = rng.random_range(-1.0..0.0);
        let b = a + rng.random_range(0.5..(1.0 - a).min(2.0));
        // f^{(n₀)}/n₀! = a_{n₀} + (n₀+1) a_{n₀+1} x on [-1, 1].
        let eps0 = coeffs[n0].abs() - (n0 as f64 + 1.0) * coeffs[n0 + 1].abs();
        let m0 = coeffs[n0 + 1].abs();
        let m = m0.max(1.0);
        let c_n0 = 2f64.powi(n0 as i32 + 1) * (n0 as f64 + 1.0).powi(n0 as i32);
        let eps_prime = eps0 / (m * c_n0);
        let beta_max = eps_prime.powi(n0 as i32 + 1);
        let beta = beta_max * 10f64.powf(rng.random_range(-2.0..0.0));
        let bound = c_n0
            * ((b - a) / eps0 * beta.powf(1.0 / (n0 as f64 + 1.0) - 1.0)
                + m * eps0.powf(-1.0 / n0 as f64) * beta.powf(1.0 / n0 as f64 - 1.0));
        let poly = coeffs.clone();
        let f = move |x: f64| {
            let mut acc = 0.0;
            for &c in poly.iter().rev() {
                acc = acc * x + c;
            }
            acc
        };
        let value = resolvent_1d(f, 0.0, beta, (a, b), 1e-6 * bound)?;
        let margin = bound * (1.0 + 1e-6) - value;
        worst = worst.min(margin / bound);
        if margin < 0.0 {
            violations += 1;
        }
    }
    Ok(outcome(draws, violations, worst))
}

/// Aggregate of the lemma suites (the bracket and ν-selection suites are
/// delegated to their home modules).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundSuiteReport {
    pub delbeta: SuiteOutcome,
    pub lnsint: SuiteOutcome,
    pub idshift: SuiteOutcome,
    pub nablaomdiff: SuiteOutcome,
    pub bracket: SuiteOutcome,
    pub nu_selection: SuiteOutcome,
}

impl BoundSuiteReport {
    pub fn all_clean(&self) -> bool {
        [
            &self.delbeta,
            &self.lnsint,
            &self.idshift,
            &self.nablaomdiff,
            &self.bracket,
            &self.nu_selection,
        ]
        .iter()
        .all(|o| o.violations == 0)
    }
}

/// Runs every lemma suite at the acceptance draw counts.
pub fn verify_bound_suites(seed: u64) -> BoundSuiteReport {
    BoundSuiteReport {
        delbeta: delbeta_suite(100_000, seed),
        lnsint: lnsint_suite(1_000, seed),
        idshift: idshift_suite(100_000, seed),
        nablaomdiff: nablaomdiff_suite(100_000, seed),
        bracket: crate::dispersion::bracket_property_suite(100_000, seed),
        nu_selection: crate::calculus::nu_selection_suite(100_000, seed),
    }
}
