//! Static gas model for plugin overheads, calibrated from published
//! measurements of the blind-auction contract.
//!
//! Exact gas depends on a specific compiler and EVM. The model instead adds
//! a per-combination constant to a baseline cost, and [`check_calibration`]
//! re-derives from the raw tables whether that is justified.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::weave::PluginSet;

/// Largest per-transition overhead spread, in gas, for a plugin's overhead
/// to count as constant.
pub const SPREAD_LIMIT: u64 = 20;

/// Default tolerance for the additivity check, in gas.
pub const DEFAULT_TOLERANCE: u64 = 25;

const EMBEDDED: &str = include_str!("../fixtures/calibration.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combos {
    pub locking: u64,
    pub counter: u64,
    pub both: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTables {
    pub none: BTreeMap<String, u64>,
    pub locking: BTreeMap<String, u64>,
    pub counter: BTreeMap<String, u64>,
    pub both: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GasCalibration {
    pub schema_version: u32,
    #[serde(rename = "_comment", default)]
    pub comment: String,
    pub per_transition_overhead: Combos,
    pub deployment_base: u64,
    pub deployment_by_plugins: Combos,
    /// Measured transaction costs per plugin combination.
    pub transaction_costs: CostTables,
    /// Percentage increases stated alongside the measurements.
    pub reported_overhead_percent: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GasError {
    #[error("no calibration for plugin set `{0}` (only locking and counter are calibrated)")]
    Uncalibrated(PluginSet),
    #[error("invalid calibration data: {0}")]
    Calibration(String),
}

impl GasError {
    pub fn code(&self) -> &'static str {
        match self {
            GasError::Uncalibrated(_) => "E_UNCALIBRATED",
            GasError::Calibration(_) => "E_CALIBRATION",
        }
    }
}

/// Which calibrated column a plugin set maps to; `None` is the baseline.
fn column(plugins: PluginSet) -> Result<Option<&'static str>, GasError> {
    if plugins.timed_transitions || plugins.access_control {
        return Err(GasError::Uncalibrated(plugins));
    }
    Ok(match (plugins.locking, plugins.transition_counter) {
        (false, false) => None,
        (true, false) => Some("locking"),
        (false, true) => Some("counter"),
        (true, true) => Some("both"),
    })
}

impl Combos {
    fn get(&self, key: &str) -> u64 {
        match key {
            "locking" => self.locking,
            "counter" => self.counter,
            _ => self.both,
        }
    }
}

impl CostTables {
    pub fn get(&self, key: Option<&str>) -> &BTreeMap<String, u64> {
        match key {
            None => &self.none,
            Some("locking") => &self.locking,
            Some("counter") => &self.counter,
            Some(_) => &self.both,
        }
    }
}

impl GasCalibration {
    pub fn from_json(json: &str) -> Result<Self, GasError> {
        let cal: GasCalibration = serde_json::from_str(json).map_err(|e| GasError::Calibration(e.to_string()))?;
        if cal.schema_version != 1 {
            return Err(GasError::Calibration(format!("unsupported schemaVersion {}", cal.schema_version)));
        }
        let t = &cal.transaction_costs;
        for (name, table) in [("locking", &t.locking), ("counter", &t.counter), ("both", &t.both)] {
            if table.keys().ne(t.none.keys()) {
                return Err(GasError::Calibration(format!(
                    "transaction table `{name}` lists different transitions than `none`"
                )));
            }
        }
        Ok(cal)
    }

    /// The calibration shipped with the crate.
    pub fn embedded() -> Self {
        Self::from_json(EMBEDDED).expect("embedded calibration is valid")
    }

    /// Baseline transaction costs (no plugins).
    pub fn baseline(&self) -> &BTreeMap<String, u64> {
        &self.transaction_costs.none
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GasEstimate {
    pub plugins: String,
    pub per_transition: BTreeMap<String, u64>,
    pub deployment: u64,
    pub overhead_percent: BTreeMap<String, f64>,
}

/// Predicts costs for `plugins` by adding the calibrated constant to every
/// baseline entry.
pub fn estimate(
    calibration: &GasCalibration,
    baseline: &BTreeMap<String, u64>,
    plugins: PluginSet,
) -> Result<GasEstimate, GasError> {
    let col = column(plugins)?;
    let overhead = col.map_or(0, |c| calibration.per_transition_overhead.get(c));
    let deployment = col.map_or(calibration.deployment_base, |c| calibration.deployment_by_plugins.get(c));
    let per_transition = baseline.iter().map(|(k, v)| (k.clone(), v + overhead)).collect();
    let overhead_percent = baseline
        .iter()
        .map(|(k, v)| (k.clone(), if *v == 0 { 0.0 } else { overhead as f64 * 100.0 / *v as f64 }))
        .collect();
    Ok(GasEstimate { plugins: plugins.label(), per_transition, deployment, overhead_percent })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CalibrationReport {
    pub tolerance: u64,
    pub checks: Vec<CheckResult>,
    /// Deployment cost with both plugins minus the sum of the single-plugin
    /// deployment overheads over the base. Reported, not checked.
    pub deployment_residual: i64,
}

impl CalibrationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Measured overhead of column `col` for every transition.
fn overheads(cal: &GasCalibration, col: &str) -> BTreeMap<String, i64> {
    let t = &cal.transaction_costs;
    t.get(Some(col)).iter().map(|(k, v)| (k.clone(), *v as i64 - t.none[k] as i64)).collect()
}

/// Re-derives the constant-overhead and additivity observations from the
/// measured tables.
///
/// * `spread/<plugin>`: max minus min overhead across transitions is at
///   most [`SPREAD_LIMIT`].
/// * `additivity/<transition>`: |overhead(both) − overhead(locking) −
///   overhead(counter)| is at most `tolerance`.
/// * `percent/<transition>`: the locking overhead, as a percentage of the
///   baseline and rounded, equals the stated figure.
pub fn check_calibration(cal: &GasCalibration, tolerance: u64) -> CalibrationReport {
    let mut checks = Vec::new();
    let per: BTreeMap<&str, BTreeMap<String, i64>> =
        ["locking", "counter", "both"].into_iter().map(|c| (c, overheads(cal, c))).collect();

    for col in ["locking", "counter", "both"] {
        let vals = &per[col];
        let (min, max) = (vals.values().min().copied().unwrap_or(0), vals.values().max().copied().unwrap_or(0));
        let spread = (max - min) as u64;
        checks.push(CheckResult {
            name: format!("spread/{col}"),
            passed: spread <= SPREAD_LIMIT,
            detail: format!("overhead {min}..{max}, spread {spread} (limit {SPREAD_LIMIT})"),
        });
    }
    for t in cal.baseline().keys() {
        let residual = per["both"][t] - per["locking"][t] - per["counter"][t];
        checks.push(CheckResult {
            name: format!("additivity/{t}"),
            passed: residual.unsigned_abs() <= tolerance,
            detail: format!(
                "{} - {} - {} = {residual} (tolerance {tolerance})",
                per["both"][t], per["locking"][t], per["counter"][t]
            ),
        });
    }
    for (t, reported) in &cal.reported_overhead_percent {
        let (Some(base), Some(over)) = (cal.baseline().get(t), per["locking"].get(t)) else {
            checks.push(CheckResult {
                name: format!("percent/{t}"),
                passed: false,
                detail: format!("no measurements for `{t}`"),
            });
            continue;
        };
        let pct = *over as f64 * 100.0 / *base as f64;
        checks.push(CheckResult {
            name: format!("percent/{t}"),
            passed: pct.round() as i64 == *reported as i64,
            detail: format!("{over}/{base} = {pct:.2}% (stated {reported}%)"),
        });
    }

    let d = |c: u64| c as i64 - cal.deployment_base as i64;
    let dp = &cal.deployment_by_plugins;
    let deployment_residual = d(dp.both) - d(dp.locking) - d(dp.counter);
    CalibrationReport { tolerance, checks, deployment_residual }
}
