use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymmetry::{accuracy_lhs, accuracy_upper_bound, fidelity_floor, rel_ent_asymmetry};
use crate::error::{Error, Result};
use crate::opcore::{fidelity, hermitian_eig, trace_distance, DensityOperator, Operator};
use crate::qchannel::{check_covariance, choi_distance, Channel};
use crate::random::haar_vector;
use crate::recovery::{best_t_search, route_to_state, RecoverySpec, RECOVERY_COVARIANCE_TOL};
use crate::report::{Check, ExperimentReport, GammaValues};
use crate::scalar::{c, Real};
use crate::showcase::ExperimentOptions;
use crate::symrep::{sym_dim, symmetric_subspace_projector, SymmetryAction};

/// Guard on `d^{n+k}`.
pub const MAX_CLONER_DIM: usize = 10_000;

/// The universal `n → n + k` cloning task for qudits of dimension `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClonerSpec {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "kk", alias = "k")]
    pub k: usize,
    /// Number of Haar-random probe states.
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_probes() -> usize {
    20
}

fn default_seed() -> u64 {
    0x5eed
}

impl ClonerSpec {
    pub fn new(d: usize, n: usize, k: usize) -> Self {
        Self {
            d,
            n,
            k,
            probes: default_probes(),
            seed: default_seed(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.n < 1 || self.k < 1 {
            return Err(Error::OutOfRange(format!(
                "cloner needs d ≥ 2, n ≥ 1, k ≥ 1 (got {}, {}, {})",
                self.d, self.n, self.k
            )));
        }
        let total = (self.d as u128).checked_pow((self.n + self.k) as u32);
        if total.is_none_or(|t| t > MAX_CLONER_DIM as u128) {
            return Err(Error::SizeGuard(format!(
                "{}^{} exceeds {MAX_CLONER_DIM}",
                self.d,
                self.n + self.k
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("d={},n={},k={}", self.d, self.n, self.k)
    }

    fn in_dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    fn extra_dim(&self) -> usize {
        self.d.pow(self.k as u32)
    }

    /// `d₊(n) / d₊(n + k)`, the optimal cloning fidelity squared.
    pub fn optimal_ratio(&self) -> Result<f64> {
        Ok(sym_dim(self.d, self.n)? as f64 / sym_dim(self.d, self.n + self.k)? as f64)
    }
}

/// `U^{⊗(n+k)}` for `U ∈ U(d)`.
pub fn cloner_action<T: Real>(spec: &ClonerSpec) -> Result<SymmetryAction<T>> {
    spec.validate()?;
    SymmetryAction::collective(spec.d, spec.n + spec.k)
}

/// `ρ ↦ (d₊(n)/d₊(n+k)) Π₊ (ρ ⊗ I) Π₊` on the symmetric subspace of `n`
/// copies. Inputs orthogonal to it are sent to the maximally mixed
/// symmetric state of `n + k` copies.
pub fn werner_cloner<T: Real>(spec: &ClonerSpec) -> Result<Channel<T>> {
    spec.validate()?;
    let (din, dk) = (spec.in_dim(), spec.extra_dim());
    let p_out = symmetric_subspace_projector::<T>(spec.d, spec.n + spec.k)?;
    let p_in = symmetric_subspace_projector::<T>(spec.d, spec.n)?;
    let scale = T::lit(spec.optimal_ratio()?).sqrt();

    let mut kraus: Vec<Operator<T>> = (0..dk)
        .map(|j| {
            let append = Operator::from_fn(din * dk, din, |row, col| {
                if row == col * dk + j {
                    c(T::one(), T::zero())
                } else {
                    c(T::zero(), T::zero())
                }
            });
            p_out.matmul(&append).scale(scale)
        })
        .collect();

    let eig = hermitian_eig(&p_in)?;
    let complement: Vec<_> = (0..din)
        .filter(|&j| eig.eigenvalues[j] < T::lit(0.5))
        .map(|j| eig.eigenvectors.column(j))
        .collect();
    let kappa = DensityOperator::normalized_projector(&p_out)?;
    kraus.extend(route_to_state(&complement, &kappa));

    Ok(Channel::new(din, din * dk, kraus, spec.label())?
        .compressed()?
        .with_domain(p_in))
}

fn power_state<T: Real>(psi: &[crate::scalar::C<T>], copies: usize) -> Result<DensityOperator<T>> {
    let one = DensityOperator::pure(psi)?;
    Ok((1..copies).fold(one.clone(), |acc, _| acc.tensor(&one)))
}

/// Recovers `ψ^{⊗(n+k)}` from `ψ^{⊗n}` with the Petz map of the partial
/// trace, anchored at the maximally mixed symmetric state, and compares it
/// with the Werner cloner.
pub fn run_cloner_experiment(spec: &ClonerSpec, opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let action = cloner_action::<f64>(spec)?;
    let a_in = action.head(spec.n)?;
    let total = spec.n + spec.k;
    let kappa = DensityOperator::normalized_projector(action.symmetric_projector()?)?;
    let discard = Channel::partial_trace(&[spec.in_dim(), spec.extra_dim()], &[0])?;
    let rs = RecoverySpec::new(discard, kappa)?;
    let werner = werner_cloner::<f64>(spec)?;

    let mut basis = vec![c(0.0, 0.0); spec.d];
    basis[0] = c(1.0, 0.0);
    let input = power_state(&basis, spec.n)?;
    let target = power_state(&basis, total)?;

    let gamma_in = rel_ent_asymmetry(&a_in, &input)?.gamma;
    let gamma_out = rel_ent_asymmetry(&action, &target)?.gamma;
    let delta = gamma_out - gamma_in;
    let rank_dy = sym_dim(spec.d, total)? as usize;
    let bounds = accuracy_upper_bound(delta, rank_dy)?;

    let search = opts.search.clone().with_floor(fidelity_floor(delta));
    let recovery = best_t_search(&rs, &input, &target, &search)?;
    let best_t = recovery.best_t;
    let recovered = rs.recover(best_t, &input)?;
    let epsilon = trace_distance(&recovered, &target)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let probe_fids = (0..spec.probes)
        .map(|_| -> Result<f64> {
            let psi = haar_vector::<f64, _>(spec.d, &mut rng);
            fidelity(&rs.recover(best_t, &power_state(&psi, spec.n)?)?, &power_state(&psi, total)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let spread = if probe_fids.is_empty() {
        0.0
    } else {
        let hi = probe_fids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = probe_fids.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    };

    let optimum = spec.optimal_ratio()?.sqrt();
    let petz_vs_werner = choi_distance(rs.petz(), &werner)?;
    let rotation = choi_distance(rs.petz(), &rs.rotated(1.0)?)?;
    let werner_cov = check_covariance(&werner, &a_in, &action, RECOVERY_COVARIANCE_TOL)?;
    let exactness = rs.exactness(best_t)?;
    let gamma_closed = (sym_dim(spec.d, spec.n)? as f64).log2();

    let mut checks = vec![
        Check::at_most("gamma_input_closed_form", (gamma_in - gamma_closed).abs(), opts.tol_eq),
        Check::at_most("petz_equals_werner", petz_vs_werner, opts.tol_eq),
        Check::at_most(
            "fidelity_matches_optimum",
            (recovery.achieved_fidelity - optimum).abs(),
            opts.tol_eq,
        ),
        Check::at_most("rotation_trivial", rotation, opts.tol_eq),
        Check::at_most("probe_spread", spread, opts.tol_eq),
        Check::at_most("werner_covariance", werner_cov.max_violation, RECOVERY_COVARIANCE_TOL),
        Check::at_most("petz_exactness", exactness, opts.tol_eq),
        Check::at_least("accuracy_bound", accuracy_lhs(epsilon, rank_dy), delta - opts.tol_floor),
    ];
    if bounds.fidelity_ceiling < 1.0 {
        checks.push(Check::at_most(
            "fidelity_ceiling",
            recovery.achieved_fidelity,
            bounds.fidelity_ceiling + opts.tol_floor,
        ));
    }

    let metrics = BTreeMap::from([
        ("optimal_fidelity".to_string(), optimum),
        ("petz_werner_distance".to_string(), petz_vs_werner),
        ("rotation_distance".to_string(), rotation),
        ("probe_spread".to_string(), spread),
        ("werner_covariance_violation".to_string(), werner_cov.max_violation),
        ("petz_exactness".to_string(), exactness),
        ("epsilon_observed".to_string(), epsilon),
    ]);

    Ok(ExperimentReport::new(
        "cloner",
        spec.label(),
        serde_json::to_value(spec).map_err(|e| Error::Parse(e.to_string()))?,
        GammaValues { gamma_in, gamma_out },
        bounds,
        recovery,
        metrics,
        checks,
        opts.tol_floor,
    ))
}
