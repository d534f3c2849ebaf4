//! Golden-suite orchestration: every inequality and identity checked by the
//! laboratory is tied to a named, seeded, reproducible record.
//!
//! `run_all` executes the checks in dependency order and returns a report
//! whose canonical serialization (timings zeroed) is byte-identical for a
//! fixed master seed, independent of worker count.

mod checks;
pub mod fd;

use crate::Result;
use serde::{Deserialize, Serialize};

/// Outcome of one randomized property suite.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub draws: u64,
    pub violations: u64,
    /// Smallest slack (bound minus value) observed; negative means violated.
    pub worst_margin: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
}

/// One named, seeded check with its margins.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// Human-readable description of what the check pins down.
    pub anchor: String,
    pub status: Status,
    pub draws: u64,
    pub violations: u64,
    pub worst_margin: f64,
    pub seed: u64,
    /// Seconds; zeroed in the canonical serialization.
    pub wall_time: f64,
}

/// Budget profile of a verification run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Structural checks only, ~1e5 samples per integral.
    Smoke,
    /// Workstation scale, ~1e7 samples per crossing integral; includes the
    /// counterexample trend.
    Desk,
    /// Overnight scale, ~1e8 samples per scan point; adds the suppression
    /// trend.
    Deep,
}

impl std::str::FromStr for Profile {
    type Err = crate::LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Profile::Smoke),
            "desk" => Ok(Profile::Desk),
            "deep" => Ok(Profile::Deep),
            other => Err(crate::LabError::InvalidConfig(format!(
                "unknown profile {other:?} (expected smoke|desk|deep)"
            ))),
        }
    }
}

/// Per-profile sampling budgets.
#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    pub crossing_samples: u64,
    pub deep_scan_samples: u64,
    pub fomega_samples: u64,
    pub oracle_seed_samples: u64,
    pub run_counterexample_trend: bool,
    pub run_suppression_trend: bool,
}

impl Budgets {
    pub fn for_profile(profile: Profile) -> Self {
        match profile {
            Profile::Smoke => Budgets {
                crossing_samples: 100_000,
                deep_scan_samples: 100_000,
                fomega_samples: 100_000,
                oracle_seed_samples: 30_720,
                run_counterexample_trend: false,
                run_suppression_trend: false,
            },
            Profile::Desk => Budgets {
                crossing_samples: 10_000_000,
                deep_scan_samples: 10_000_000,
                fomega_samples: 1_000_000,
                oracle_seed_samples: 122_880,
                run_counterexample_trend: true,
                run_suppression_trend: false,
            },
            Profile::Deep => Budgets {
                crossing_samples: 10_000_000,
                deep_scan_samples: 100_000_000,
                fomega_samples: 1_000_000,
                oracle_seed_samples: 122_880,
                run_counterexample_trend: true,
                run_suppression_trend: true,
            },
        }
    }
}

/// Acceptance-criterion → record-id mapping entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionMap {
    pub criterion: u32,
    pub record_id: String,
    /// Whether the current profile executes the record.
    pub included: bool,
}

/// The full verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub profile: Profile,
    pub master_seed: u64,
    pub workers: usize,
    pub criteria: Vec<CriterionMap>,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status == Status::Pass)
    }

    /// JSON with wall times included (not byte-reproducible).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Byte-reproducible JSON: timing fields zeroed.
    pub fn canonical_json(&self) -> Result<String> {
        let mut clone = self.clone();
        for r in clone.records.iter_mut() {
            r.wall_time = 0.0;
        }
        Ok(serde_json::to_string_pretty(&clone)?)
    }

    /// One line per record for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| {
                format!(
                    "{} {:<38} draws={:<9} violations={:<4} worst_margin={:+.3e} [{:.2}s]",
                    match r.status {
                        Status::Pass => "PASS",
                        Status::Fail => "FAIL",
                    },
                    r.id,
                    r.draws,
                    r.violations,
                    r.worst_margin,
                    r.wall_time
                )
            })
            .collect()
    }
}

fn criteria_map(budgets: &Budgets) -> Vec<CriterionMap> {
    let entry = |criterion: u32, id: &str, included: bool| CriterionMap {
        criterion,
        record_id: id.to_string(),
        included,
    };
    vec![
        entry(
            1,
            "acceptance.counterexample_trend",
            budgets.run_counterexample_trend,
        ),
        entry(
            2,
            "acceptance.suppression_trend",
            budgets.run_suppression_trend,
        ),
        entry(3, "acceptance.bounds_1d", true),
        entry(4, "acceptance.geometry", true),
        entry(5, "acceptance.classification_goldens", true),
        entry(6, "acceptance.fomega_fit", true),
        entry(7, "acceptance.lemma_suites", true),
        entry(8, "acceptance.mc_oracles", true),
        entry(9, "acceptance.determinism", true),
    ]
}

/// Runs every check of the profile in dependency order.
pub fn run_all(profile: Profile, master_seed: u64, workers: usize) -> Result<Report> {
    crate::parallel::with_workers(workers, || run_all_inner(profile, master_seed, workers))?
}

fn run_all_inner(profile: Profile, master_seed: u64, workers: usize) -> Result<Report> {
    let budgets = Budgets::for_profile(profile);
    let seed = master_seed;
    let mut records: Vec<CheckRecord> = Vec::new();

    // Dispersion property suite.
    records.push(checks::periodicity(seed));
    records.push(checks::gradient_fd(seed));
    records.push(checks::dirderiv_gradient(seed));
    records.push(checks::norm_bounds(seed));
    records.push(checks::bracket(seed));

    // Composition and composite-derivative suite.
    records.push(checks::compositions_count(seed));
    records.push(checks::composite_fd(seed));
    records.push(checks::nu_selection(seed));

    // Chart, curve, and curvature suite.
    records.push(checks::chart_pullback(seed));
    records.push(checks::chart_determinant(seed));
    records.push(checks::chart_containment(seed));
    records.push(checks::chart_gradient_stability(seed));
    records.push(checks::curve_level_drift(seed));
    records.push(checks::curve_gtilde(seed));
    records.push(checks::curve_drift_bound(seed));
    let geometry_parts: Vec<&CheckRecord> = records
        .iter()
        .filter(|r| {
            r.id.starts_with("chart.") || r.id.starts_with("curve.") || r.id == "composite.fd"
        })
        .collect();
    let geometry = checks::aggregate(
        "acceptance.geometry",
        "chart, level-curve, curvature, and composite-derivative margins",
        seed,
        &geometry_parts,
    );
    records.push(geometry);

    // One-dimensional bound suites and the lemma suites.
    records.push(checks::bounds_1d(seed)?);
    records.push(checks::lemma_suites(seed));

    // Classification goldens and f_ω fits.
    records.push(checks::classification_goldens(seed)?);
    records.push(checks::fomega_fit(seed, &budgets)?);

    // Crossing-integral goldens and engine checks.
    records.push(checks::mc_oracles(seed, &budgets)?);
    records.push(checks::determinism(seed)?);

    // Sweeps (desk and deep profiles).
    if budgets.run_counterexample_trend {
        records.push(checks::counterexample_trend(seed, &budgets)?);
    }
    if budgets.run_suppression_trend {
        records.push(checks::suppression_trend(seed, &budgets)?);
    }

    Ok(Report {
        schema_version: crate::SCHEMA_VERSION,
        profile,
        master_seed,
        workers,
        criteria: criteria_map(&budgets),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_module_reachable() {
        let d = fd::nth_derivative(|t| t * t * t, 0.5, 2, 1e-2);
        assert!((d - 3.0).abs() < 1e-9);
    }

    #[test]
    fn profile_parse() {
        assert_eq!("desk".parse::<Profile>().unwrap(), Profile::Desk);
        assert!("noidea".parse::<Profile>().is_err());
    }
}
