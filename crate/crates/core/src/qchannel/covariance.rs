use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{tensor, trace_norm, DensityOperator, Operator};
use crate::qchannel::channel::{compose, state_kraus_weights, Channel, KrausMap};
use crate::scalar::Real;
use crate::symrep::{ActionKind, SymmetryAction};

pub const COVARIANCE_TOL: f64 = 1e-8;
pub const IDEMPOTENCE_TOL: f64 = 1e-8;
/// Sample times used alongside the structural Hamiltonian check.
pub const SAMPLE_TIMES: [f64; 3] = [0.1, 0.7, 2.3];
pub const COLLECTIVE_SAMPLES: usize = 20;
pub const COLLECTIVE_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementViolation {
    pub label: String,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub covariant: bool,
    pub max_violation: f64,
    pub tolerance: f64,
    pub checks: Vec<ElementViolation>,
}

impl CovarianceReport {
    fn from_checks(checks: Vec<ElementViolation>, tolerance: f64) -> Self {
        let max_violation = checks.iter().map(|c| c.violation).fold(0.0, f64::max);
        Self {
            covariant: max_violation <= tolerance,
            max_violation,
            tolerance,
            checks,
        }
    }
}

/// `‖J(E∘U) − J(V∘E)‖₁` for one pair of representatives.
fn pair_violation<T: Real>(e: &KrausMap<T>, u_in: &Operator<T>, v_out: &Operator<T>) -> Result<T> {
    let left: Vec<_> = e.kraus().iter().map(|k| k.matmul(u_in)).collect();
    let right: Vec<_> = e.kraus().iter().map(|k| v_out.matmul(k)).collect();
    let jl = KrausMap::new(e.in_dim(), e.out_dim(), left)?.choi();
    let jr = KrausMap::new(e.in_dim(), e.out_dim(), right)?.choi();
    Ok(trace_norm(&(&jl - &jr)))
}

fn check_dims<T: Real>(e: &Channel<T>, a_in: &SymmetryAction<T>, a_out: &SymmetryAction<T>) -> Result<()> {
    if a_in.total_dim() != e.in_dim() {
        return Err(Error::DimMismatch {
            expected: e.in_dim(),
            got: a_in.total_dim(),
        });
    }
    if a_out.total_dim() != e.out_dim() {
        return Err(Error::DimMismatch {
            expected: e.out_dim(),
            got: a_out.total_dim(),
        });
    }
    Ok(())
}

/// Checks `E(U_g ρ U_g†) = V_g E(ρ) V_g†` for the group representations on
/// input and output.
///
/// Finite groups are checked element by element. Time translations are checked
/// structurally, `‖[J, H̄_in ⊗ I − I ⊗ H_out]‖₁`, and at a few sample times.
/// Collective actions use seeded Haar samples.
pub fn check_covariance<T: Real>(
    e: &Channel<T>,
    a_in: &SymmetryAction<T>,
    a_out: &SymmetryAction<T>,
    tol: f64,
) -> Result<CovarianceReport> {
    check_dims(e, a_in, a_out)?;
    let map = e.as_map();
    let mut checks = Vec::new();
    match (a_in.kind(), a_out.kind()) {
        (ActionKind::FiniteGroup { .. }, ActionKind::FiniteGroup { .. }) => {
            let (us, vs) = (a_in.joint_unitaries()?, a_out.joint_unitaries()?);
            if us.len() != vs.len() {
                return Err(Error::UnsupportedAction(format!(
                    "group orders differ: {} vs {}",
                    us.len(),
                    vs.len()
                )));
            }
            for (g, (u, v)) in us.iter().zip(vs).enumerate() {
                checks.push(ElementViolation {
                    label: format!("g{g}"),
                    violation: pair_violation(map, u, v)?.as_f64(),
                });
            }
        }
        (ActionKind::HamiltonianGenerated { .. }, ActionKind::HamiltonianGenerated { .. }) => {
            let h_in = a_in.joint_generator()?;
            let h_out = a_out.joint_generator()?;
            let k = &tensor(&h_in.conj(), &Operator::identity(e.out_dim()))
                - &tensor(&Operator::identity(e.in_dim()), &h_out);
            checks.push(ElementViolation {
                label: "structural".into(),
                violation: trace_norm(&e.choi().commutator(&k)).as_f64(),
            });
            for t in SAMPLE_TIMES {
                let t = T::lit(t);
                checks.push(ElementViolation {
                    label: format!("t={}", t),
                    violation: pair_violation(map, &a_in.evolution(t)?, &a_out.evolution(t)?)?.as_f64(),
                });
            }
        }
        (
            ActionKind::CollectiveUnitary { local_dim: d_in, .. },
            ActionKind::CollectiveUnitary { local_dim: d_out, .. },
        ) if d_in == d_out => {
            for (s, u) in a_in
                .sample_local_unitaries(COLLECTIVE_SAMPLES, COLLECTIVE_SEED)?
                .iter()
                .enumerate()
            {
                let v = pair_violation(map, &a_in.collective_power(u)?, &a_out.collective_power(u)?)?;
                checks.push(ElementViolation {
                    label: format!("haar{s}"),
                    violation: v.as_f64(),
                });
            }
        }
        _ => {
            return Err(Error::UnsupportedAction(format!(
                "cannot compare {} with {}",
                a_in.kind_name(),
                a_out.kind_name()
            )))
        }
    }
    Ok(CovarianceReport::from_checks(checks, tol))
}

/// Checks `F∘D = D∘F` for an idempotent dephasing map `D`.
pub fn check_dephasing_covariance<T: Real>(f: &Channel<T>, d: &Channel<T>, tol: f64) -> Result<CovarianceReport> {
    if d.in_dim() != d.out_dim() || f.in_dim() != d.in_dim() || f.out_dim() != d.in_dim() {
        return Err(Error::Shape("dephasing covariance needs square channels of equal dimension".into()));
    }
    let dd = compose(d, d)?;
    let idem = trace_norm(&(dd.choi() - d.choi()));
    if idem > T::tol(IDEMPOTENCE_TOL) {
        return Err(Error::NotIdempotent(idem.as_f64()));
    }
    let fd = compose(f, d)?;
    let df = compose(d, f)?;
    let v = trace_norm(&(fd.choi() - df.choi()));
    Ok(CovarianceReport::from_checks(
        vec![ElementViolation {
            label: "FD-DF".into(),
            violation: v.as_f64(),
        }],
        tol,
    ))
}

/// Group average `(1/|G|) Σ_g V_g† ∘ E ∘ U_g`, covariant by construction.
pub fn symmetrize<T: Real>(e: &Channel<T>, a_in: &SymmetryAction<T>, a_out: &SymmetryAction<T>) -> Result<Channel<T>> {
    check_dims(e, a_in, a_out)?;
    let (us, vs) = match (a_in.kind(), a_out.kind()) {
        (ActionKind::FiniteGroup { .. }, ActionKind::FiniteGroup { .. }) => {
            (a_in.joint_unitaries()?, a_out.joint_unitaries()?)
        }
        _ => {
            return Err(Error::UnsupportedAction(
                "symmetrization needs finite groups on both sides".into(),
            ))
        }
    };
    if us.len() != vs.len() {
        return Err(Error::UnsupportedAction("group orders differ".into()));
    }
    let w = (T::one() / T::from_count(us.len())).sqrt();
    let mut kraus = Vec::with_capacity(us.len() * e.kraus().len());
    for (u, v) in us.iter().zip(vs) {
        for k in e.kraus() {
            kraus.push(v.adjoint().matmul(k).matmul(u).scale(w));
        }
    }
    Channel::new(e.in_dim(), e.out_dim(), kraus, format!("sym({})", e.name()))?.compressed()
}

/// `ρ ↦ ρ ⊗ σ` for a symmetric ancilla `σ`.
pub fn append_symmetric_state<T: Real>(
    in_dim: usize,
    sigma: &DensityOperator<T>,
    action: &SymmetryAction<T>,
) -> Result<Channel<T>> {
    let dev = action.asymmetry_deviation(sigma)?;
    if dev > T::tol(1e-8) {
        return Err(Error::NotSymmetric(dev.as_f64()));
    }
    let id = Operator::identity(in_dim);
    let kraus = state_kraus_weights(sigma)
        .into_iter()
        .map(|(p, v)| tensor(&id, &Operator::ket(&v).scale(p.sqrt())))
        .collect();
    Channel::new(in_dim, in_dim * sigma.dim(), kraus, "append")
}

/// Discards every subsystem not in `keep`.
pub fn discard_system<T: Real>(dims: &[usize], keep: &[usize]) -> Result<Channel<T>> {
    Channel::partial_trace(dims, keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{partial_trace, plus_state};
    use crate::random::{random_channel, random_state};
    use crate::scalar::{cr, C};
    use crate::symrep::{number_operator, z2_phase_flip, EigenBlocks, Subsystem};
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ham(dim: usize) -> SymmetryAction<f64> {
        SymmetryAction::hamiltonian(vec![Subsystem::new("A", dim)], vec![number_operator(dim)], None).unwrap()
    }

    /// Raises the excitation by one, wrapping the top level down to zero.
    fn shift_channel() -> Channel<f64> {
        let mut up = Operator::zeros(3, 3);
        up[(1, 0)] = C::one();
        up[(2, 1)] = C::one();
        let mut wrap = Operator::zeros(3, 3);
        wrap[(0, 2)] = C::one();
        Channel::new(3, 3, vec![up, wrap], "shift").unwrap()
    }

    #[test]
    fn structural_check_agrees_with_sampled_times() {
        let a = ham(3);
        let shift = check_covariance(&shift_channel(), &a, &a, COVARIANCE_TOL).unwrap();
        assert!(shift.covariant, "{shift:?}");

        // Non-covariant: a Haar-random unitary.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = random_channel::<f64, _>(3, 3, 1, &mut rng);
        let r = check_covariance(&ch, &a, &a, COVARIANCE_TOL).unwrap();
        let structural = r.checks[0].violation;
        let sampled = r.checks[1..].iter().map(|c| c.violation).fold(0.0, f64::max);
        assert!(structural > 1e-3 && sampled > 1e-3);
    }

    #[test]
    fn opposite_sign_convention_would_fail() {
        // With H̄_in ⊗ I + I ⊗ H_out the energy-shifting channel is flagged.
        let ch = shift_channel();
        let h: Operator<f64> = number_operator(3);
        let wrong = &tensor(&h.conj(), &Operator::identity(3)) + &tensor(&Operator::identity(3), &h);
        assert!(trace_norm(&ch.choi().commutator(&wrong)) > 1e-3);
    }

    #[test]
    fn z2_examples() {
        let a = z2_phase_flip::<f64>("A");
        let z = Operator::real_diag(&[1.0, -1.0]);
        let x = Operator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(check_covariance(&Channel::unitary(&z, "Z").unwrap(), &a, &a, COVARIANCE_TOL).unwrap().covariant);
        let rx = check_covariance(&Channel::unitary(&x, "X").unwrap(), &a, &a, COVARIANCE_TOL).unwrap();
        assert!(rx.covariant);
        let h = Operator::from_real_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]])
            .unwrap()
            .scale(0.5f64.sqrt());
        assert!(!check_covariance(&Channel::unitary(&h, "H").unwrap(), &a, &a, COVARIANCE_TOL).unwrap().covariant);
    }

    #[test]
    fn symmetrized_channels_are_covariant() {
        let a = z2_phase_flip::<f64>("A");
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ch = random_channel::<f64, _>(2, 2, 2, &mut rng);
        let s = symmetrize(&ch, &a, &a).unwrap();
        assert!(check_covariance(&s, &a, &a, COVARIANCE_TOL).unwrap().covariant);
        let ham = ham(2);
        assert!(matches!(symmetrize(&ch, &ham, &ham), Err(Error::UnsupportedAction(_))));
    }

    #[test]
    fn collective_partial_trace_is_covariant() {
        let a3 = SymmetryAction::<f64>::collective(2, 3).unwrap();
        let a2 = SymmetryAction::<f64>::collective(2, 2).unwrap();
        let tr = discard_system::<f64>(&[2, 2, 2], &[0, 1]).unwrap();
        assert!(check_covariance(&tr, &a3, &a2, COVARIANCE_TOL).unwrap().covariant);
    }

    #[test]
    fn dephasing_covariance() {
        let blocks = EigenBlocks::<f64>::from_block_sizes(&[1, 2]).unwrap();
        let d = blocks.dephasing_map();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = blocks.sign_group("A").unwrap();
        let f = symmetrize(&random_channel::<f64, _>(3, 3, 2, &mut rng), &g, &g).unwrap();
        assert!(check_dephasing_covariance(&f, &d, COVARIANCE_TOL).unwrap().covariant);
        let r = random_channel::<f64, _>(3, 3, 2, &mut rng);
        assert!(!check_dephasing_covariance(&r, &d, COVARIANCE_TOL).unwrap().covariant);
        // A non-idempotent "dephasing" map is rejected.
        let u = Operator::from_real_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let not_d = Channel::unitary(&u, "swap").unwrap();
        assert!(matches!(check_dephasing_covariance(&f, &not_d, COVARIANCE_TOL), Err(Error::NotIdempotent(_))));
    }

    #[test]
    fn append_then_discard_is_identity() {
        let a = z2_phase_flip::<f64>("S");
        let sigma = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        let app = append_symmetric_state(3, &sigma, &a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let rho = random_state::<f64, _>(3, &mut rng);
        let out = app.apply(&rho).unwrap();
        assert!((out.matrix() - rho.tensor(&sigma).matrix()).max_abs() < 1e-12);
        let back = partial_trace(&out, &[3, 2], &[0]).unwrap();
        assert!((back.matrix() - rho.matrix()).max_abs() < 1e-12);
        assert!(matches!(append_symmetric_state(3, &plus_state(), &a), Err(Error::NotSymmetric(_))));
        let _ = (cr::<f64>(1.0), C::<f64>::zero());
    }
}
