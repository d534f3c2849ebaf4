//! Hyperplane-constancy certificates.
//!
//! ω is constant on {x·u = r₀} iff, after grouping the support frequencies
//! by their projection Q_u m, every class with nonzero projection has a
//! vanishing class sum S_q(r₀). For a finite trigonometric polynomial a
//! non-singleton class forces u parallel to a difference of support
//! frequencies, and an all-parallel support forces u parallel to a single
//! frequency, so those two families exhaust the candidate directions.

use crate::dispersion::{torus_wrap, DispersionModel, ModelKind, TrigPoly, TWO_PI};
use crate::linalg;
use crate::{LabError, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Points sampled on the hyperplane when verifying a candidate root.
const VERIFY_SAMPLES: usize = 10_000;
/// Accepted relative deviation of ω over the verification sample.
const VERIFY_TOL: f64 = 1e-9;
/// Scan resolution over one period of r₀.
const SCAN_POINTS: usize = 4096;

/// A verified certificate: ω equals `value` on the affine hyperplane
/// {x·u = r₀} (and on all its lattice translates at spacing `period`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HyperplaneCertificate {
    pub u: Vec<f64>,
    pub r0: f64,
    pub value: f64,
    pub max_deviation: f64,
    /// Primitive integer vector parallel to u.
    pub lattice_direction: Vec<i64>,
    /// Spacing of the lattice translates of the hyperplane along u.
    pub period: f64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Primitive canonical representative of an integer direction.
fn primitive(mut v: Vec<i64>) -> Option<Vec<i64>> {
    let g = v.iter().copied().fold(0, gcd);
    if g == 0 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= g;
    }
    if let Some(&lead) = v.iter().find(|&&x| x != 0) {
        if lead < 0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
    Some(v)
}

fn candidate_directions(poly: &TrigPoly) -> Vec<Vec<i64>> {
    let freqs: Vec<&[i64]> = poly.terms().iter().map(|t| t.freq.0.as_slice()).collect();
    let mut out: Vec<Vec<i64>> = Vec::new();
    let mut push = |v: Option<Vec<i64>>| {
        if let Some(v) = v {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    };
    for (i, m) in freqs.iter().enumerate() {
        push(primitive(m.to_vec()));
        for m2 in freqs.iter().skip(i + 1) {
            let diff: Vec<i64> = m.iter().zip(m2.iter()).map(|(a, b)| a - b).collect();
            let sum: Vec<i64> = m.iter().zip(m2.iter()).map(|(a, b)| a + b).collect();
            push(primitive(diff));
            push(primitive(sum));
        }
    }
    out
}

/// One paired projection class: phases (m·u) with complex coefficients,
/// stored as S(r₀) = Σ (c_j - i s_j) e^{2πi φ_j r₀} + conjugate partners.
struct ClassSum {
    /// (phase speed m·u, re, im) triples; conjugate partners carry
    /// negated phase and conjugated coefficient.
    entries: Vec<(f64, f64, f64)>,
}

impl ClassSum {
    fn magnitude(&self, r0: f64) -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for &(speed, zr, zi) in &self.entries {
            let (s, c) = (TWO_PI * speed * r0).sin_cos();
            re += zr * c - zi * s;
            im += zr * s + zi * c;
        }
        re.hypot(im)
    }
}

struct CandidateAnalysis {
    u: Vec<f64>,
    direction: Vec<i64>,
    period: f64,
    classes: Vec<ClassSum>,
    /// Parallel-class value contribution: value(r₀) = const + Re Σ z e^{2πiφr₀}.
    parallel: ClassSum,
}

fn analyze_candidate(poly: &TrigPoly, dir: &[i64]) -> CandidateAnalysis {
    let d = poly.dim();
    let dir_f: Vec<f64> = dir.iter().map(|&x| x as f64).collect();
    let dir_norm = linalg::norm(&dir_f);
    let u: Vec<f64> = dir_f.iter().map(|x| x / dir_norm).collect();
    // Lattice shifts move x·u by multiples of 1/|g| (g primitive), so r₀ is
    // only meaningful modulo that spacing; the class-sum magnitudes share
    // the same period.
    let period = 1.0 / dir_norm;
    // Projection classes keyed by Q_u m, with ±q identified.
    let mut keys: Vec<Vec<f64>> = Vec::new();
    let mut classes: Vec<ClassSum> = Vec::new();
    let mut parallel = ClassSum {
        entries: Vec::new(),
    };
    for t in poly.terms() {
        let m: Vec<f64> = t.freq.0.iter().map(|&x| x as f64).collect();
        let along = linalg::dot(&m, &u);
        let mut q = m.clone();
        linalg::axpy(&mut q, -along, &u);
        let qn = linalg::norm(&q);
        let z = (t.cos_coeff, -t.sin_coeff);
        if qn < 1e-9 {
            parallel.entries.push((along, z.0, z.1));
            continue;
        }
        // Canonical sign of q for the ±q pairing.
        let mut flip = false;
        for i in 0..d {
            if q[i].abs() > 1e-9 {
                flip = q[i] < 0.0;
                break;
            }
        }
        let key: Vec<f64> = if flip {
            q.iter().map(|x| -x).collect()
        } else {
            q.clone()
        };
        // Flipped members enter as the conjugate partner: z̄ e^{-2πiφr₀}.
        let entry = if flip {
            (-along, z.0, -z.1)
        } else {
            (along, z.0, z.1)
        };
        let slot = keys.iter().position(|k| {
            k.iter()
                .zip(&key)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                < 1e-8
        });
        match slot {
            Some(i) => classes[i].entries.push(entry),
            None => {
                keys.push(key);
                classes.push(ClassSum {
                    entries: vec![entry],
                });
            }
        }
    }
    CandidateAnalysis {
        u,
        direction: dir.to_vec(),
        period,
        classes,
        parallel,
    }
}

fn golden_minimize(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn hyperplane_value(poly: &TrigPoly, analysis: &CandidateAnalysis, r0: f64) -> f64 {
    let mut v = poly.constant();
    for &(speed, zr, zi) in &analysis.parallel.entries {
        let (s, c) = (TWO_PI * speed * r0).sin_cos();
        v += zr * c - zi * s;
    }
    v
}

/// Samples `VERIFY_SAMPLES` points on the hyperplane and returns the
/// largest |ω(x) - value| (evaluating the full model, so square-root
/// models are verified against ω itself, not its square).
fn verify_on_hyperplane(model: &DispersionModel, u: &[f64], r0: f64, value: f64, seed: u64) -> f64 {
    let d = model.dim();
    let mut rng = crate::rngutil::stream_rng(seed, crate::rngutil::Domain::Suite, 0x4A);
    // Orthonormal tangent basis from the rotation taking e₁ to u.
    let a = linalg::rotation_e1_to(u);
    let mut worst: f64 = 0.0;
    let mut x = vec![0.0; d];
    for _ in 0..VERIFY_SAMPLES {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = r0 * u[i];
        }
        for col in 1..d {
            let t: f64 = rng.random_range(-5.0..5.0);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += t * a[i * d + col];
            }
        }
        let w = model.eval(torus_wrap(&x).coords());
        worst = worst.max((w - value).abs());
    }
    worst
}

/// Finds all verified hyperplane-constancy certificates of the model.
///
/// For square-root models the search runs on the inner polynomial and the
/// certificate value is mapped through the square root before verification.
pub fn find_hyperplanes(model: &DispersionModel) -> Result<Vec<HyperplaneCertificate>> {
    let poly = model.inner();
    if poly.dim() < 2 {
        return Err(LabError::PreconditionViolated(
            "hyperplane certificates need dimension >= 2".into(),
        ));
    }
    let mut out: Vec<HyperplaneCertificate> = Vec::new();
    let scale: f64 = poly
        .terms()
        .iter()
        .map(|t| t.amplitude())
        .sum::<f64>()
        .max(1.0);
    for dir in candidate_directions(poly) {
        let analysis = analyze_candidate(poly, &dir);
        let period = analysis.period;
        let objective = |r0: f64| -> f64 { analysis.classes.iter().map(|c| c.magnitude(r0)).sum() };

        let mut roots: Vec<f64> = Vec::new();
        if analysis.classes.is_empty() {
            // ω depends on x·u only: constant on every hyperplane ⊥ u.
            roots.push(0.0);
        } else {
            let vals: Vec<f64> = (0..SCAN_POINTS)
                .map(|i| objective(period * i as f64 / SCAN_POINTS as f64))
                .collect();
            for i in 0..SCAN_POINTS {
                let prev = vals[(i + SCAN_POINTS - 1) % SCAN_POINTS];
                let next = vals[(i + 1) % SCAN_POINTS];
                if vals[i] <= prev && vals[i] <= next && vals[i] < 0.1 * scale {
                    let center = period * i as f64 / SCAN_POINTS as f64;
                    let h = period / SCAN_POINTS as f64;
                    let r0 = golden_minimize(&objective, center - h, center + h, 1e-13);
                    if objective(r0) < 1e-10 * scale {
                        roots.push(r0);
                    }
                }
            }
        }
        // Canonicalize into (-period/2, period/2] and merge near-duplicates.
        let mut canon: Vec<f64> = Vec::new();
        for r in roots {
            let mut c = r - period * (r / period).round();
            if c <= -period / 2.0 {
                c += period;
            }
            if canon.iter().all(|x| (x - c).abs() > 1e-9) {
                canon.push(c);
            }
        }
        canon.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for r0 in canon {
            let mut value = hyperplane_value(poly, &analysis, r0);
            if model.kind() == ModelKind::SqrtOfTrigPoly {
                if value < 0.0 {
                    continue;
                }
                value = value.sqrt();
            }
            let deviation = verify_on_hyperplane(model, &analysis.u, r0, value, 0x51ab);
            if deviation < VERIFY_TOL * (1.0 + value.abs()) {
                out.push(HyperplaneCertificate {
                    u: analysis.u.clone(),
                    r0,
                    value,
                    max_deviation: deviation,
                    lattice_direction: analysis.direction.clone(),
                    period,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{builtin, ce_morse_d3, nn_laplacian};

    #[test]
    fn ce_morse_certificates_quarter_planes() {
        let certs = find_hyperplanes(&ce_morse_d3()).unwrap();
        let e1_certs: Vec<&HyperplaneCertificate> = certs
            .iter()
            .filter(|c| (c.u[0] - 1.0).abs() < 1e-12)
            .collect();
        let r0s: Vec<f64> = e1_certs.iter().map(|c| c.r0).collect();
        assert!(
            r0s.iter().any(|r| (r - 0.25).abs() < 1e-9),
            "missing +1/4: {r0s:?}"
        );
        assert!(
            r0s.iter().any(|r| (r + 0.25).abs() < 1e-9),
            "missing -1/4: {r0s:?}"
        );
        for c in &e1_certs {
            assert!((c.value - 5.0).abs() < 1e-9);
            assert!(c.max_deviation < 1e-9 * 6.0);
        }
    }

    #[test]
    fn nn2d_squared_diagonal_certificate() {
        let m = builtin("nn2d_squared").unwrap();
        let certs = find_hyperplanes(&m).unwrap();
        let inv = 1.0 / 2f64.sqrt();
        let hit = certs.iter().find(|c| {
            (c.u[0] - inv).abs() < 1e-12
                && (c.u[1] - inv).abs() < 1e-12
                && (c.r0.abs() - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-9
        });
        assert!(hit.is_some(), "{certs:?}");
        assert!((hit.unwrap().value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nn2d_sqrt_certificate_with_sqrt_value() {
        let m = builtin("nn2d_sqrt").unwrap();
        let certs = find_hyperplanes(&m).unwrap();
        assert!(!certs.is_empty());
        for c in &certs {
            assert!((c.value - 2f64.sqrt()).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn nn3_has_no_certificates() {
        let certs = find_hyperplanes(&nn_laplacian(3)).unwrap();
        assert!(certs.is_empty(), "{certs:?}");
    }

    #[test]
    fn one_dimensional_like_model_all_offsets() {
        use crate::dispersion::{DispersionModel, TrigPoly};
        // ω depends only on x₁ + x₂: constant on every hyperplane ⊥ (1,1).
        let p = TrigPoly::new(2, 0.0, vec![(vec![1, 1], 1.0, 0.0)]).unwrap();
        let m = DispersionModel::trig("ridge", p);
        let certs = find_hyperplanes(&m).unwrap();
        let inv = 1.0 / 2f64.sqrt();
        assert!(certs
            .iter()
            .any(|c| (c.u[0] - inv).abs() < 1e-12 && (c.u[1] - inv).abs() < 1e-12));
    }
}
