//! Medium-budget golden runs for the torus integrals and the sweep.

use resolvent_lab::dispersion::{builtin, nn_laplacian, sabs, torus_wrap};
use resolvent_lab::quadrature::{crossing_integral, resolvent_torus, McConfig, ResolventQuery};
use resolvent_lab::scaling::{beta_sweep, ScanConfig};

fn cfg(samples: u64, seed: u64) -> McConfig {
    McConfig {
        samples,
        strata_per_axis: 2,
        importance_weight: 0.5,
        groups: 15,
        seed,
    }
}

#[test]
fn zero_model_scales_exactly_as_beta_cubed() {
    let zero = builtin("zero").unwrap();
    for beta in [1.0, 0.5, 0.25] {
        let q = ResolventQuery::new([0.0; 3], beta, torus_wrap(&[0.0; 3])).unwrap();
        let est = crossing_integral(&zero, &q, &cfg(61_440, 4)).unwrap();
        assert!(
            (est.value - beta.powi(-3)).abs() <= 1e-12 * beta.powi(-3),
            "beta {beta}: {}",
            est.value
        );
    }
}

#[test]
fn nn3_single_resolvent_grows_at_most_logarithmically() {
    // Semi-dispersivity at the band center: the β-sequence of estimates
    // grows no faster than c·⟨ln β⟩ for a fitted c.
    let m = nn_laplacian(3);
    let mut values = Vec::new();
    for (i, beta) in [0.3, 0.1, 0.03].into_iter().enumerate() {
        let est = resolvent_torus(&m, 3.0, beta, 0.0, 0.0, &cfg(400_000, 10 + i as u64)).unwrap();
        values.push((beta, est.value, est.standard_error));
    }
    let c_fit = values
        .iter()
        .map(|(b, v, _)| v / sabs(b.ln()))
        .fold(0.0f64, f64::max);
    for (b, v, s) in &values {
        assert!(v - 3.0 * s <= c_fit * sabs(b.ln()));
    }
    // The growth from β = 0.3 to 0.03 stays below the ⟨ln β⟩ ratio.
    let log_ratio = sabs(0.03f64.ln()) / sabs(0.3f64.ln());
    let growth = values[2].1 / values[0].1;
    assert!(
        growth <= log_ratio * 1.1,
        "growth {growth} vs log ratio {log_ratio}"
    );
    // Weighted form (p = 1/2): same logarithmic ceiling.
    let w03 = resolvent_torus(&m, 3.0, 0.3, 0.5, 0.0, &cfg(400_000, 20)).unwrap();
    let w003 = resolvent_torus(&m, 3.0, 0.03, 0.5, 0.0, &cfg(400_000, 21)).unwrap();
    assert!(w003.value / w03.value <= log_ratio * 1.1);
}

#[test]
fn refinement_never_certifies_lower_than_cheap_pass() {
    // More samples on the same cell agree within combined 3σ.
    let m = nn_laplacian(2);
    let q = ResolventQuery::new([2.0, 2.0, 2.0], 0.1, torus_wrap(&[0.1, 0.3])).unwrap();
    let cheap = crossing_integral(&m, &q, &cfg(30_720, 6)).unwrap();
    let refined = crossing_integral(&m, &q, &cfg(480_000, 7)).unwrap();
    let slack = 3.0 * (cheap.standard_error.powi(2) + refined.standard_error.powi(2)).sqrt();
    assert!(
        refined.value >= cheap.value - slack,
        "refined {} vs cheap {} (slack {slack})",
        refined.value,
        cheap.value
    );
}

#[test]
fn nn3_sweep_beats_the_basic_estimate() {
    // Fitted ρ over the default β ladder stays above -1 + 0.1: the scanned
    // supremum decays strictly slower than β⁻¹.
    let m = nn_laplacian(3);
    let scan = ScanConfig {
        alpha_per_axis: 5,
        k0_per_axis: 1,
        cheap_fraction: 0.25,
        top_k: 4,
        mc: cfg(2_000_000, 12),
    };
    let sweep = beta_sweep(&m, &[0.3, 0.1, 0.05, 0.03, 0.01], &scan).unwrap();
    assert!(
        sweep.rho > -0.9,
        "rho = {} (points {:?})",
        sweep.rho,
        sweep
            .points
            .iter()
            .map(|p| p.estimate.value)
            .collect::<Vec<_>>()
    );
    assert!(sweep.rho < 0.0);
}
