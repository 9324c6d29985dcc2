use serde::{Deserialize, Serialize};

use crate::asymmetry::{fidelity_floor, rel_ent_asymmetry, rel_ent_coherence};
use crate::error::{Error, Result};
use crate::opcore::DensityOperator;
use crate::qchannel::{check_covariance, check_dephasing_covariance, Channel, CovarianceReport};
use crate::recovery::{best_t_search, RecoveryResult, RecoverySpec, SearchOptions};
use crate::scalar::Real;
use crate::symrep::{EigenBlocks, SymmetryAction};

/// Covariance tolerance for forward channels and constructed recoveries.
pub const RECOVERY_COVARIANCE_TOL: f64 = 1e-7;

/// Outcome of recovering `ρ` after a covariant channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReversibilityReport<T: Real> {
    pub gamma_in: T,
    pub gamma_out: T,
    /// Asymmetry lost by the forward channel, `Γ_in(ρ) − Γ_out(F(ρ))`.
    pub delta_gamma: T,
    pub recovery: RecoveryResult<T>,
    pub recovery_covariance: CovarianceReport,
    /// `‖R_t(F(κ)) − κ‖₁` at the chosen `t`.
    pub petz_exactness: T,
}

impl<T: Real> ReversibilityReport<T> {
    pub fn passes(&self, floor_tol: T) -> bool {
        self.recovery.passes(floor_tol) && self.recovery_covariance.covariant
    }
}

/// Number of leading subsystems of `action` whose joint dimension is `dim`.
pub(crate) fn split_at_dim<T: Real>(action: &SymmetryAction<T>, dim: usize) -> Result<usize> {
    let mut acc = 1;
    for (i, d) in action.dims().into_iter().enumerate() {
        acc *= d;
        if acc == dim {
            return Ok(i + 1);
        }
        if acc > dim {
            break;
        }
    }
    Err(Error::Shape(format!(
        "no leading subsystems of {:?} have dimension {dim}",
        action.dims()
    )))
}

/// Petz data for `τ → τ ⊗ σ`: `N = Tr_S`, `κ = G(τ ⊗ σ)`.
pub fn catalytic_spec<T: Real>(
    action: &SymmetryAction<T>,
    tau: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
) -> Result<RecoverySpec<T>> {
    split_at_dim(action, tau.dim())?;
    if tau.dim() * sigma.dim() != action.total_dim() {
        return Err(Error::DimMismatch {
            expected: action.total_dim(),
            got: tau.dim() * sigma.dim(),
        });
    }
    let trace_s = Channel::partial_trace(&[tau.dim(), sigma.dim()], &[0])?;
    let kappa = action.twirl(&tau.tensor(sigma))?;
    RecoverySpec::new(trace_s, kappa)
}

/// The rotated Petz channel from `R` to `RS` preparing `σ` catalytically.
pub fn catalytic_recovery<T: Real>(
    action: &SymmetryAction<T>,
    tau: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    t: T,
) -> Result<Channel<T>> {
    catalytic_spec(action, tau, sigma)?.rotated(t)
}

/// Recovers `ρ` from `F(ρ)` with a rotated Petz map anchored at `G(ρ)` and
/// checks the bound `F(R(F(ρ)), ρ) ≥ 2^{−ΔΓ/2}`.
pub fn verify_reversibility<T: Real>(
    f: &Channel<T>,
    action_in: &SymmetryAction<T>,
    action_out: &SymmetryAction<T>,
    rho: &DensityOperator<T>,
    opts: &SearchOptions<T>,
) -> Result<ReversibilityReport<T>> {
    let cov = check_covariance(f, action_in, action_out, RECOVERY_COVARIANCE_TOL)?;
    if !cov.covariant {
        return Err(Error::NotCovariant(cov.max_violation));
    }
    let gamma_in = rel_ent_asymmetry(action_in, rho)?.gamma;
    let out = f.apply(rho)?;
    let gamma_out = rel_ent_asymmetry(action_out, &out)?.gamma;
    let delta_gamma = gamma_in - gamma_out;

    let spec = RecoverySpec::new(f.clone(), action_in.twirl(rho)?)?;
    spec.check_support(rho)?;
    let opts = opts.clone().with_floor(fidelity_floor(delta_gamma));
    let recovery = best_t_search(&spec, &out, rho, &opts)?;
    let channel = spec.rotated(recovery.best_t)?;
    let recovery_covariance = check_covariance(&channel, action_out, action_in, RECOVERY_COVARIANCE_TOL)?;
    Ok(ReversibilityReport {
        gamma_in,
        gamma_out,
        delta_gamma,
        petz_exactness: spec.exactness(recovery.best_t)?,
        recovery,
        recovery_covariance,
    })
}

/// The coherence analogue of [`verify_reversibility`], anchored at `D(ρ)`.
pub fn verify_dephasing_recovery<T: Real>(
    f: &Channel<T>,
    blocks: &EigenBlocks<T>,
    rho: &DensityOperator<T>,
    opts: &SearchOptions<T>,
) -> Result<ReversibilityReport<T>> {
    let d = blocks.dephasing_map();
    let cov = check_dephasing_covariance(f, &d, RECOVERY_COVARIANCE_TOL)?;
    if !cov.covariant {
        return Err(Error::NotCovariant(cov.max_violation));
    }
    let gamma_in = rel_ent_coherence(blocks, rho)?.gamma;
    let out = f.apply(rho)?;
    let gamma_out = rel_ent_coherence(blocks, &out)?.gamma;
    let delta_gamma = gamma_in - gamma_out;

    let spec = RecoverySpec::new(f.clone(), d.apply(rho)?)?;
    spec.check_support(rho)?;
    let opts = opts.clone().with_floor(fidelity_floor(delta_gamma));
    let recovery = best_t_search(&spec, &out, rho, &opts)?;
    let channel = spec.rotated(recovery.best_t)?;
    let recovery_covariance = check_dephasing_covariance(&channel, &d, RECOVERY_COVARIANCE_TOL)?;
    Ok(ReversibilityReport {
        gamma_in,
        gamma_out,
        delta_gamma,
        petz_exactness: spec.exactness(recovery.best_t)?,
        recovery,
        recovery_covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{fidelity, plus_state, Operator};
    use crate::qchannel::{discard_system, symmetrize};
    use crate::random::{random_channel, random_state};
    use crate::symrep::{cyclic_phase, number_operator, z2_phase_flip, Subsystem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quick() -> SearchOptions<f64> {
        SearchOptions {
            grid_points: 81,
            ..Default::default()
        }
    }

    fn twirl_channel(a: &SymmetryAction<f64>) -> Channel<f64> {
        let n = a.total_dim();
        let us = a.joint_unitaries().unwrap();
        let w = 1.0 / (us.len() as f64).sqrt();
        Channel::new(n, n, us.iter().map(|u| u.scale(w)).collect(), "twirl").unwrap()
    }

    #[test]
    fn identity_is_perfectly_reversible() {
        let a = z2_phase_flip::<f64>("A");
        let r = verify_reversibility(&Channel::identity(2), &a, &a, &plus_state(), &quick()).unwrap();
        assert!(r.delta_gamma.abs() < 1e-12);
        assert!((r.recovery.achieved_fidelity - 1.0).abs() < 1e-8);
        assert!(r.passes(1e-6));
    }

    #[test]
    fn twirl_channel_respects_floor() {
        let a = z2_phase_flip::<f64>("A");
        let r = verify_reversibility(&twirl_channel(&a), &a, &a, &plus_state(), &quick()).unwrap();
        assert!((r.delta_gamma - 1.0).abs() < 1e-10);
        assert!(r.recovery.achieved_fidelity >= 0.5f64.sqrt() - 1e-6);
        assert!(r.passes(1e-6));
    }

    #[test]
    fn non_covariant_channel_is_rejected() {
        let a = z2_phase_flip::<f64>("A");
        let h = Operator::from_real_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]])
            .unwrap()
            .scale(0.5f64.sqrt());
        let ch = Channel::unitary(&h, "H").unwrap();
        assert!(matches!(
            verify_reversibility(&ch, &a, &a, &plus_state(), &quick()),
            Err(Error::NotCovariant(_))
        ));
    }

    #[test]
    fn random_covariant_channels_respect_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let a = cyclic_phase::<f64>(3, vec![Subsystem::new("A", 3)]).unwrap();
        for _ in 0..4 {
            let f = symmetrize(&random_channel::<f64, _>(3, 3, 2, &mut rng), &a, &a).unwrap();
            let rho = random_state::<f64, _>(3, &mut rng);
            let r = verify_reversibility(&f, &a, &a, &rho, &quick()).unwrap();
            assert!(r.passes(1e-6), "{r:?}");
            assert!(r.petz_exactness <= 1e-8);
        }
    }

    #[test]
    fn partial_trace_matches_catalytic_spec() {
        let systems = vec![Subsystem::new("R", 2), Subsystem::new("S", 2)];
        let a = cyclic_phase::<f64>(4, systems).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let tau = random_state::<f64, _>(2, &mut rng);
        let sigma = random_state::<f64, _>(2, &mut rng);
        let target = tau.tensor(&sigma);
        let rep = verify_reversibility(
            &discard_system(&[2, 2], &[0]).unwrap(),
            &a,
            &a.head(1).unwrap(),
            &target,
            &quick(),
        )
        .unwrap();
        let spec = catalytic_spec(&a, &tau, &sigma).unwrap();
        let probe = spec.channel().apply(&target).unwrap();
        let direct = best_t_search(&spec, &probe, &target, &quick().with_floor(rep.recovery.fidelity_floor)).unwrap();
        assert_eq!(direct.achieved_fidelity.to_bits(), rep.recovery.achieved_fidelity.to_bits());
        assert_eq!(direct.best_t.to_bits(), rep.recovery.best_t.to_bits());
    }

    #[test]
    fn symmetric_sigma_is_free() {
        let systems = vec![Subsystem::new("R", 3), Subsystem::new("S", 2)];
        let a = SymmetryAction::hamiltonian(systems, vec![number_operator(3), number_operator(2)], None).unwrap();
        let tau = DensityOperator::pure(&crate::opcore::uniform_vector::<f64>(3)).unwrap();
        let sigma = DensityOperator::diagonal(&[0.4, 0.6]).unwrap();
        let r = catalytic_recovery(&a, &tau, &sigma, 0.0).unwrap();
        let out = r.apply(&tau).unwrap();
        assert!(fidelity(&out, &tau.tensor(&sigma)).unwrap() >= 1.0 - 1e-8);
        let cov = check_covariance(&r, &a.head(1).unwrap(), &a, RECOVERY_COVARIANCE_TOL).unwrap();
        assert!(cov.covariant, "{cov:?}");
    }

    #[test]
    fn dephasing_examples() {
        let blocks = EigenBlocks::<f64>::from_block_sizes(&[1, 2]).unwrap();
        let d = blocks.dephasing_map();
        let rho = DensityOperator::pure(&crate::opcore::uniform_vector::<f64>(3)).unwrap();
        let r = verify_dephasing_recovery(&d, &blocks, &rho, &quick()).unwrap();
        assert!(r.passes(1e-6));
        let phases = Operator::diag(&[
            crate::scalar::c(1.0, 0.0),
            crate::scalar::c(0.0, 1.0),
            crate::scalar::c(0.0, -1.0),
        ]);
        let u = Channel::unitary(&phases, "phases").unwrap();
        let r = verify_dephasing_recovery(&u, &blocks, &rho, &quick()).unwrap();
        assert!(r.delta_gamma.abs() < 1e-10);
        assert!(r.recovery.achieved_fidelity >= 1.0 - 1e-6);
    }
}
