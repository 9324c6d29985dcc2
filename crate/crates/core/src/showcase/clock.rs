use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymmetry::{accuracy_lhs, accuracy_upper_bound};
use crate::error::{Error, Result};
use crate::opcore::{
    fidelity, partial_trace, plus_state, support_projector, support_rank, trace_distance, DensityOperator,
};
use crate::qchannel::discard_system;
use crate::recovery::{catalytic_spec, verify_reversibility, RECOVERY_COVARIANCE_TOL};
use crate::report::{Check, ExperimentReport, GammaValues};
use crate::scalar::{c, Real};
use crate::showcase::ExperimentOptions;
use crate::symrep::{number_operator, Subsystem, SymmetryAction};

/// Largest clock register handled by the experiment.
const MAX_CLOCK_DIM: usize = 4096;

/// An oscillator clock `|ψ_k⟩ = T^{−1/2} Σ_n |kn⟩` and a qubit system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockSpec {
    #[serde(rename = "T")]
    pub t: usize,
    pub k: usize,
    /// Oscillator frequency. Uniform rescaling leaves every block unchanged,
    /// so it is recorded but not used.
    #[serde(default = "unit")]
    pub omega: f64,
}

fn unit() -> f64 {
    1.0
}

impl ClockSpec {
    pub fn new(t: usize, k: usize) -> Self {
        Self { t, k, omega: 1.0 }
    }

    /// `k(T − 1) + 1`, just enough levels to hold the clock state.
    pub fn dim_r(&self) -> usize {
        self.k * (self.t - 1) + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 2 || self.k < 1 {
            return Err(Error::OutOfRange(format!(
                "clock needs T ≥ 2 and k ≥ 1 (got T={}, k={})",
                self.t, self.k
            )));
        }
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(Error::OutOfRange(format!("omega must be positive, got {}", self.omega)));
        }
        if self.dim_r() > MAX_CLOCK_DIM {
            return Err(Error::SizeGuard(format!("clock dimension {} exceeds {MAX_CLOCK_DIM}", self.dim_r())));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("T={},k={}", self.t, self.k)
    }
}

/// Time translations generated by `N_R ⊗ I + I ⊗ N_S`.
pub fn clock_action<T: Real>(spec: &ClockSpec) -> Result<SymmetryAction<T>> {
    spec.validate()?;
    SymmetryAction::hamiltonian(
        vec![Subsystem::new("R", spec.dim_r()), Subsystem::new("S", 2)],
        vec![number_operator(spec.dim_r()), number_operator(2)],
        None,
    )
}

pub fn clock_state<T: Real>(spec: &ClockSpec) -> Result<DensityOperator<T>> {
    spec.validate()?;
    let amp = T::one() / T::from_count(spec.t).sqrt();
    let mut psi = vec![c(T::zero(), T::zero()); spec.dim_r()];
    for n in 0..spec.t {
        psi[spec.k * n] = c(amp, T::zero());
    }
    DensityOperator::pure(&psi)
}

/// Prepares `|+⟩` on `S` from the clock `R` with a rotated Petz map and
/// records how close the output is to `|ψ_k⟩ ⊗ |+⟩`.
pub fn run_clock_experiment(spec: &ClockSpec, opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let action = clock_action::<f64>(spec)?;
    let tau = clock_state::<f64>(spec)?;
    let sigma = plus_state::<f64>();
    let target = tau.tensor(&sigma);
    let dims = [spec.dim_r(), 2];

    // Preparing σ is the inverse of discarding it.
    let rev = verify_reversibility(
        &discard_system(&dims, &[0])?,
        &action,
        &action.head(1)?,
        &target,
        &opts.search,
    )?;
    let (gamma_tau, gamma_joint) = (rev.gamma_out, rev.gamma_in);
    let delta = gamma_joint - gamma_tau;

    let kappa = action.twirl(&target)?;
    let rank_dy = support_rank(kappa.eigenvalues());
    let bounds = accuracy_upper_bound(delta, rank_dy)?;

    let recovered = rev
        .recovery
        .recovered
        .clone()
        .ok_or_else(|| Error::Shape("search returned no recovered state".into()))?;
    let epsilon = trace_distance(&recovered, &target)?;
    let s_fidelity = fidelity(&partial_trace(&recovered, &dims, &[1])?, &sigma)?;
    let leak = recovered.weight_outside(&support_projector(kappa.spectrum()));

    let log_t = (spec.t as f64).log2();
    let joint_closed = if spec.k == 1 { log_t + 1.0 / spec.t as f64 } else { log_t + 1.0 };

    let mut checks = vec![
        Check::at_most("gamma_clock_closed_form", (gamma_tau - log_t).abs(), opts.tol_eq),
        Check::at_most("gamma_joint_closed_form", (gamma_joint - joint_closed).abs(), opts.tol_eq),
        Check::at_most("petz_exactness", rev.petz_exactness, opts.tol_eq),
        Check::at_most(
            "recovery_covariance",
            rev.recovery_covariance.max_violation,
            RECOVERY_COVARIANCE_TOL,
        ),
        Check::at_most("weight_outside_kappa", leak, opts.tol_eq),
        Check::at_least("accuracy_bound", accuracy_lhs(epsilon, rank_dy), delta - opts.tol_floor),
    ];
    if bounds.fidelity_ceiling < 1.0 {
        checks.push(Check::at_most(
            "fidelity_ceiling",
            rev.recovery.achieved_fidelity,
            bounds.fidelity_ceiling + opts.tol_floor,
        ));
    }

    let mut metrics = BTreeMap::from([
        ("omega".to_string(), spec.omega),
        ("gamma_joint_closed_form".to_string(), joint_closed),
        ("epsilon_observed".to_string(), epsilon),
        ("s_fidelity".to_string(), s_fidelity),
        ("t0_fidelity".to_string(), rev.recovery.t0_fidelity),
        ("petz_exactness".to_string(), rev.petz_exactness),
        ("recovery_covariance_violation".to_string(), rev.recovery_covariance.max_violation),
        ("weight_outside_kappa".to_string(), leak),
    ]);

    // For k ≥ 2 the clock is invariant under a translation that flips the
    // qubit's coherence, so no covariant map can bring S near |+⟩.
    if spec.k >= 2 {
        let cat = catalytic_spec(&action, &tau, &sigma)?;
        let points = opts.search.grid_points.max(2);
        let step = 2.0 * opts.search.t_max / (points - 1) as f64;
        let grid: Vec<f64> = (0..points).map(|i| -opts.search.t_max + step * i as f64).collect();
        let best_s = grid
            .par_iter()
            .map(|&t| -> Result<f64> {
                let out = cat.recover(t, &tau)?;
                fidelity(&partial_trace(&out, &dims, &[1])?, &sigma)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(s_fidelity, f64::max);
        metrics.insert("s_fidelity_max_over_t".into(), best_s);
        checks.push(Check::at_most(
            "s_fidelity_ceiling",
            best_s,
            std::f64::consts::FRAC_1_SQRT_2 + opts.tol_floor,
        ));
    }

    Ok(ExperimentReport::new(
        "clock",
        spec.label(),
        serde_json::to_value(spec).map_err(|e| Error::Parse(e.to_string()))?,
        GammaValues {
            gamma_in: gamma_tau,
            gamma_out: gamma_joint,
        },
        bounds,
        rev.recovery,
        metrics,
        checks,
        opts.tol_floor,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymmetry::rel_ent_asymmetry;
    use crate::recovery::SearchOptions;

    fn quick() -> ExperimentOptions {
        ExperimentOptions {
            search: SearchOptions {
                grid_points: 41,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn small_clock_state() {
        let rho = clock_state::<f64>(&ClockSpec::new(2, 1)).unwrap();
        assert!((rho.matrix().get(0, 1).re - 0.5).abs() < 1e-15);
        let spec = ClockSpec::new(4, 2);
        let rho = clock_state::<f64>(&spec).unwrap();
        assert_eq!(rho.dim(), 7);
        for i in 0..7 {
            let p = rho.matrix().get(i, i).re;
            assert!((p - if i % 2 == 0 { 0.25 } else { 0.0 }).abs() < 1e-15);
        }
        let a = clock_action::<f64>(&spec).unwrap().head(1).unwrap();
        assert!((rel_ent_asymmetry(&a, &rho).unwrap().gamma - 2.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(clock_state::<f64>(&ClockSpec::new(1, 1)).is_err());
        assert!(clock_state::<f64>(&ClockSpec::new(3, 0)).is_err());
    }

    #[test]
    fn t2_clock_meets_floor() {
        let r = run_clock_experiment(&ClockSpec::new(2, 1), &quick()).unwrap();
        assert!((r.bounds.delta_gamma - 0.5).abs() < 1e-10);
        assert!((r.recovery.fidelity_floor - 2f64.powf(-0.25)).abs() < 1e-12);
        assert!(r.pass, "{:#?}", r.checks);
        assert!(r.audit());
    }

    #[test]
    fn stride_two_cannot_prepare_plus() {
        let r = run_clock_experiment(&ClockSpec::new(3, 2), &quick()).unwrap();
        assert!((r.bounds.delta_gamma - 1.0).abs() < 1e-10);
        assert!(r.check("s_fidelity_ceiling").unwrap().pass);
        assert!(r.pass, "{:#?}", r.checks);
    }
}
