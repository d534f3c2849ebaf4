//! End-to-end smoke run of the verification pipeline.

use resolvent_lab::verify::{run_all, Profile, Status};

#[test]
fn smoke_profile_all_structural_checks_pass() {
    let report = run_all(Profile::Smoke, 0, 2).expect("run_all");
    for line in report.summary_lines() {
        println!("{line}");
    }
    // The smoke profile skips the two trend records.
    let included: Vec<&str> = report
        .criteria
        .iter()
        .filter(|c| c.included)
        .map(|c| c.record_id.as_str())
        .collect();
    assert!(!included.contains(&"acceptance.counterexample_trend"));
    for c in &report.criteria {
        if c.included {
            let rec = report
                .records
                .iter()
                .find(|r| r.id == c.record_id)
                .unwrap_or_else(|| panic!("record {} missing", c.record_id));
            assert_eq!(
                rec.status,
                Status::Pass,
                "criterion {}: {rec:?}",
                c.criterion
            );
        }
    }
    assert!(report.all_pass(), "some records failed");
}

#[test]
fn smoke_reports_byte_identical_across_worker_counts() {
    let a = run_all(Profile::Smoke, 7, 1).expect("run 1");
    let b = run_all(Profile::Smoke, 7, 8).expect("run 8");
    let c = run_all(Profile::Smoke, 7, 1).expect("run 1 again");
    let ja = a.canonical_json().unwrap();
    let jb = b.canonical_json().unwrap();
    let jc = c.canonical_json().unwrap();
    // Worker count is recorded in the header, so compare records only.
    let strip = |r: &resolvent_lab::verify::Report| {
        let mut r = r.clone();
        r.workers = 0;
        r.canonical_json().unwrap()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(ja.len(), jc.len());
    assert_eq!(ja, jc);
    let _ = jb;
}
