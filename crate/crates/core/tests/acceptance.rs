//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line. Criteria 1-8 read the records of a single deep-profile
//! verification run (so every threshold lives in the library, pinned);
//! criterion 9 reruns the report pipeline across worker counts.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use resolvent_lab::verify::{run_all, CheckRecord, Profile, Report, Status};
use std::sync::OnceLock;

fn deep_report() -> &'static Report {
    static REPORT: OnceLock<Report> = OnceLock::new();
    REPORT.get_or_init(|| {
        let workers = resolvent_lab::parallel::worker_count(None);
        run_all(Profile::Deep, 0, workers).expect("deep verification run")
    })
}

fn criterion_record(n: u32) -> &'static CheckRecord {
    let report = deep_report();
    let map = report
        .criteria
        .iter()
        .find(|c| c.criterion == n)
        .unwrap_or_else(|| panic!("criterion {n} missing from the report header"));
    assert!(
        map.included,
        "criterion {n} not included in the deep profile"
    );
    report
        .records
        .iter()
        .find(|r| r.id == map.record_id)
        .unwrap_or_else(|| panic!("record {} missing", map.record_id))
}

fn assert_criterion(n: u32, label: &str) {
    let rec = criterion_record(n);
    let status = match rec.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
    };
    println!(
        "ACCEPTANCE {n} ({label}): {status} -- draws={} violations={} worst_margin={:+.3e}",
        rec.draws, rec.violations, rec.worst_margin
    );
    assert_eq!(rec.status, Status::Pass, "criterion {n} failed: {rec:?}");
}

#[test]
fn criterion_1_counterexample_trend() {
    assert_criterion(1, "counterexample slab bound and monotone beta*I");
}

#[test]
fn criterion_2_suppression_trend() {
    assert_criterion(2, "nn3 scanned beta*I falls by >= 1.5x");
}

#[test]
fn criterion_3_one_dimensional_bounds() {
    assert_criterion(3, "1D resolvent bound suites, zero violations");
}

#[test]
fn criterion_4_geometry() {
    assert_criterion(4, "chart, curve, curvature, composite-derivative margins");
}

#[test]
fn criterion_5_classification_goldens() {
    assert_criterion(5, "certificates, critical points, verdicts");
}

#[test]
fn criterion_6_fomega_log_growth() {
    assert_criterion(6, "f_omega affine in <ln s> with R^2 >= 0.9");
}

#[test]
fn criterion_7_lemma_suites() {
    assert_criterion(7, "lemma property suites, zero violations");
}

#[test]
fn criterion_8_mc_oracles() {
    assert_criterion(8, "MC engine vs dense-grid and closed-form oracles");
}

#[test]
fn criterion_9_deterministic_reports() {
    // Byte-identical canonical reports for a fixed master seed: two runs
    // and worker counts {1, 8}.
    let a = run_all(Profile::Smoke, 0, 1).expect("run A");
    let b = run_all(Profile::Smoke, 0, 8).expect("run B");
    let c = run_all(Profile::Smoke, 0, 1).expect("run C");
    let strip = |r: &Report| {
        let mut r = r.clone();
        r.workers = 0; // recorded in the header; not part of the payload
        r.canonical_json().expect("serialize")
    };
    let (ja, jb, jc) = (strip(&a), strip(&b), strip(&c));
    let pass = ja == jb && ja == jc;
    println!(
        "ACCEPTANCE 9 (byte-identical verify reports): {} -- {} bytes",
        if pass { "PASS" } else { "FAIL" },
        ja.len()
    );
    assert!(pass, "reports differ across runs or worker counts");
}
