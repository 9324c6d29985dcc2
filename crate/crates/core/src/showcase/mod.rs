//! Two worked experiments: catalytic state preparation with a bounded clock,
//! and the optimal universal cloner recovered as a Petz map.

mod clock;
mod cloner;

pub use clock::{clock_action, clock_state, run_clock_experiment, ClockSpec};
pub use cloner::{cloner_action, run_cloner_experiment, werner_cloner, ClonerSpec, MAX_CLONER_DIM};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::SearchOptions;
use crate::report::ExperimentReport;

/// Tolerances shared by both experiments.
#[derive(Clone, Debug)]
pub struct ExperimentOptions {
    pub search: SearchOptions<f64>,
    /// Equalities between channels, states and closed forms.
    pub tol_eq: f64,
    /// Slack on fidelity floors, ceilings and the accuracy bound.
    pub tol_floor: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            search: SearchOptions::default(),
            tol_eq: 1e-8,
            tol_floor: 1e-6,
        }
    }
}

/// An experiment description as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentSpec {
    Clock(ClockSpec),
    Cloner(ClonerSpec),
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn run(&self, opts: &ExperimentOptions) -> Result<ExperimentReport> {
        match self {
            Self::Clock(s) => run_clock_experiment(s, opts),
            Self::Cloner(s) => run_cloner_experiment(s, opts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_spec_shapes() {
        let clock = ExperimentSpec::from_json(r#"{"clock": {"T": 4, "k": 1}}"#).unwrap();
        assert_eq!(
            clock,
            ExperimentSpec::Clock(ClockSpec {
                t: 4,
                k: 1,
                omega: 1.0
            })
        );
        let cloner = ExperimentSpec::from_json(r#"{"cloner": {"d": 2, "n": 1, "kk": 1, "probes": 5}}"#).unwrap();
        let ExperimentSpec::Cloner(c) = cloner else { panic!() };
        assert_eq!((c.d, c.n, c.k, c.probes), (2, 1, 1, 5));
        assert!(ExperimentSpec::from_json(r#"{"clock": {"k": 1}}"#).is_err());
    }
}
