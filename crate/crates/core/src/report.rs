//! Machine-readable experiment reports (JSON and flat CSV rows).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::asymmetry::BoundsRecord;
use crate::recovery::RecoveryResult;

pub const SCHEMA_VERSION: u32 = 1;

/// Frozen CSV column order; bump [`SCHEMA_VERSION`] when it changes.
pub const CSV_COLUMNS: [&str; 16] = [
    "schema_version",
    "command",
    "instance",
    "gamma_in",
    "gamma_out",
    "delta_gamma",
    "rank_DY",
    "epsilon_floor",
    "fidelity_floor",
    "fidelity_ceiling",
    "achieved_fidelity",
    "best_t",
    "margin",
    "grid_points",
    "floor_pass",
    "pass",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// A named comparison whose verdict can be recomputed from the stored numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            threshold,
            pass: value >= threshold,
        }
    }

    pub fn recompute(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.threshold,
            Relation::AtLeast => self.value >= self.threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaValues {
    /// Asymmetry of the input resource.
    pub gamma_in: f64,
    /// Asymmetry of the desired output.
    pub gamma_out: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub command: String,
    pub instance: String,
    pub inputs: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inputs_digest: Option<String>,
    pub gamma: GammaValues,
    pub bounds: BoundsRecord<f64>,
    pub recovery: RecoveryResult<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub floor_tol: f64,
    pub floor_pass: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_seconds: Option<f64>,
}

impl ExperimentReport {
    /// Assembles a report and derives its pass flags.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        command: impl Into<String>,
        instance: impl Into<String>,
        inputs: serde_json::Value,
        gamma: GammaValues,
        bounds: BoundsRecord<f64>,
        recovery: RecoveryResult<f64>,
        metrics: BTreeMap<String, f64>,
        checks: Vec<Check>,
        floor_tol: f64,
    ) -> Self {
        let floor_pass = recovery.margin >= -floor_tol;
        let pass = floor_pass && checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            instance: instance.into(),
            inputs,
            inputs_digest: None,
            gamma,
            bounds,
            recovery,
            metrics,
            checks,
            floor_tol,
            floor_pass,
            pass,
            wall_time_seconds: None,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// True when every stored flag agrees with the stored numbers.
    pub fn audit(&self) -> bool {
        let floor_ok = self.floor_pass == (self.recovery.margin >= -self.floor_tol);
        let checks_ok = self.checks.iter().all(|c| c.pass == c.recompute());
        let pass_ok = self.pass == (self.floor_pass && self.checks.iter().all(|c| c.pass));
        floor_ok && checks_ok && pass_ok
    }

    pub fn csv_header() -> String {
        csv_line(CSV_COLUMNS.iter().map(|c| c.to_string()))
    }

    /// One CSV record, quoted where needed, without a trailing newline.
    pub fn csv_row(&self) -> String {
        let fields = [
            self.schema_version.to_string(),
            self.command.clone(),
            self.instance.clone(),
            self.gamma.gamma_in.to_string(),
            self.gamma.gamma_out.to_string(),
            self.bounds.delta_gamma.to_string(),
            self.bounds.rank_dy.to_string(),
            self.bounds.epsilon_floor.to_string(),
            self.bounds.fidelity_floor.to_string(),
            self.bounds.fidelity_ceiling.to_string(),
            self.recovery.achieved_fidelity.to_string(),
            self.recovery.best_t.to_string(),
            self.recovery.margin.to_string(),
            self.recovery.grid_points.to_string(),
            self.floor_pass.to_string(),
            self.pass.to_string(),
        ];
        csv_line(fields)
    }
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("utf-8 fields").trim_end_matches('\n').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymmetry::accuracy_upper_bound;

    fn sample(margin: f64) -> ExperimentReport {
        let recovery = RecoveryResult {
            achieved_fidelity: 0.9 + margin,
            best_t: 0.0,
            fidelity_floor: 0.9,
            margin,
            grid_points: 401,
            t0_fidelity: 0.9,
            recovered: None,
        };
        ExperimentReport::new(
            "clock",
            "T=4,k=1",
            serde_json::json!({"T": 4}),
            GammaValues {
                gamma_in: 2.0,
                gamma_out: 2.25,
            },
            accuracy_upper_bound(0.25, 8).unwrap(),
            recovery,
            BTreeMap::new(),
            vec![Check::at_most("exactness", 1e-12, 1e-8)],
            1e-6,
        )
    }

    #[test]
    fn pass_flags_follow_margin() {
        assert!(sample(0.01).pass);
        assert!(sample(-1e-7).pass);
        assert!(!sample(-1e-3).pass);
        assert!(sample(-1e-3).audit());
    }

    #[test]
    fn tampered_report_fails_audit() {
        let mut r = sample(0.01);
        r.recovery.margin = -0.5;
        assert!(!r.audit());
    }

    #[test]
    fn csv_row_matches_header() {
        let r = sample(0.01);
        let row = format!("{}\n{}\n", ExperimentReport::csv_header(), r.csv_row());
        let mut rd = csv::Reader::from_reader(row.as_bytes());
        let rec = rd.records().next().unwrap().unwrap();
        assert_eq!(rec.len(), CSV_COLUMNS.len());
        assert_eq!(&rec[2], "T=4,k=1");
    }

    #[test]
    fn json_omits_wall_time_by_default() {
        let v = serde_json::to_value(sample(0.0)).unwrap();
        assert!(v.get("wall_time_seconds").is_none());
        assert_eq!(v["bounds"]["rank_DY"], 8);
        assert!(v["recovery"].get("achieved_fidelity").is_some());
    }
}
