use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use asymcat::report::ExperimentReport;
use asymcat::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Why a command failed, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// 1: a property in a verification suite failed.
    Property(String),
    /// 2: an input could not be read or parsed.
    Parse(String),
    /// 3: an input or result violates an invariant.
    Invariant(String),
    /// 4: a fidelity floor was missed.
    Floor(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Self::Property(_) => 1,
            Self::Parse(_) => 2,
            Self::Invariant(_) => 3,
            Self::Floor(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Property(m) | Self::Parse(m) | Self::Invariant(m) | Self::Floor(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) => Self::Parse(m),
            other => Self::Invariant(other.to_string()),
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, serde_json::Value), Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let parsed = T::deserialize(&raw).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok((parsed, raw))
}

/// SHA-256 of the compact JSON rendering of `inputs` (keys sorted).
pub fn digest(inputs: &serde_json::Value) -> String {
    hex::encode(Sha256::digest(inputs.to_string().as_bytes()))
}

pub fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Invariant(e.to_string()))?;
    println!("{text}");
    Ok(())
}

pub fn write_csv(path: &Path, reports: &[ExperimentReport]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Parse(format!("cannot write {}: {e}", path.display()));
    let mut f = File::create(path).map_err(io)?;
    writeln!(f, "{}", ExperimentReport::csv_header()).map_err(io)?;
    for r in reports {
        writeln!(f, "{}", r.csv_row()).map_err(io)?;
    }
    Ok(())
}

pub fn print_report(r: &ExperimentReport) {
    println!("{} {}", r.command, r.instance);
    println!(
        "  gamma in {:.6}  out {:.6}  delta {:.6}",
        r.gamma.gamma_in, r.gamma.gamma_out, r.bounds.delta_gamma
    );
    println!(
        "  fidelity achieved {:.6}  floor {:.6}  ceiling {:.6}  margin {:.3e}  best t {:.4}",
        r.recovery.achieved_fidelity,
        r.recovery.fidelity_floor,
        r.bounds.fidelity_ceiling,
        r.recovery.margin,
        r.recovery.best_t
    );
    for (name, value) in &r.metrics {
        if *value != 0.0 && value.abs() < 1e-4 {
            println!("  {name} = {value:.3e}");
        } else {
            println!("  {name} = {value:.9}");
        }
    }
    for c in &r.checks {
        let verdict = if c.pass { "ok  " } else { "FAIL" };
        println!("  [{verdict}] {} = {:.3e} (limit {:.3e})", c.name, c.value, c.threshold);
    }
    println!("  {}", if r.pass { "pass" } else { "FAIL" });
}

/// Exit status for a batch of reports: floors first, then other checks.
pub fn verdict(reports: &[ExperimentReport]) -> Result<(), Failure> {
    if let Some(r) = reports.iter().find(|r| !r.floor_pass) {
        return Err(Failure::Floor(format!(
            "{} {}: fidelity {} below floor {}",
            r.command, r.instance, r.recovery.achieved_fidelity, r.recovery.fidelity_floor
        )));
    }
    if let Some(r) = reports.iter().find(|r| !r.pass) {
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Err(Failure::Invariant(format!(
            "{} {}: failed checks {}",
            r.command,
            r.instance,
            failed.join(", ")
        )));
    }
    Ok(())
}
