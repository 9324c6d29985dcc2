use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{relative_entropy, von_neumann_entropy, DensityOperator};
use crate::scalar::Real;
use crate::symrep::{EigenBlocks, SymmetryAction};

/// `Γ(ρ) = S(G(ρ)) − S(ρ)` together with both entropies (all in bits).
///
/// The same record holds the coherence `Λ(ρ) = S(D(ρ)) − S(ρ)`, with `action`
/// naming the dephasing blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AsymmetryValue<T: Real> {
    pub gamma: T,
    pub entropy_twirled: T,
    pub entropy_state: T,
    /// `S(ρ‖G(ρ))`, which equals `gamma` for a genuine twirl.
    pub relative_entropy: T,
    pub action: String,
}

fn value_from<T: Real>(
    rho: &DensityOperator<T>,
    twirled: &DensityOperator<T>,
    action: String,
) -> Result<AsymmetryValue<T>> {
    let entropy_state = von_neumann_entropy(rho);
    let entropy_twirled = von_neumann_entropy(twirled);
    let relative_entropy = relative_entropy(rho, twirled)?
        .finite()
        .ok_or_else(|| Error::Support("state leaks outside the support of its twirl".into()))?;
    Ok(AsymmetryValue {
        gamma: entropy_twirled - entropy_state,
        entropy_twirled,
        entropy_state,
        relative_entropy,
        action,
    })
}

pub fn rel_ent_asymmetry<T: Real>(action: &SymmetryAction<T>, rho: &DensityOperator<T>) -> Result<AsymmetryValue<T>> {
    let twirled = action.twirl(rho)?;
    value_from(rho, &twirled, action.kind_name().to_string())
}

pub fn rel_ent_coherence<T: Real>(blocks: &EigenBlocks<T>, rho: &DensityOperator<T>) -> Result<AsymmetryValue<T>> {
    if blocks.dim() != rho.dim() {
        return Err(Error::DimMismatch {
            expected: blocks.dim(),
            got: rho.dim(),
        });
    }
    let dephased = DensityOperator::from_trusted(blocks.dephase(rho.matrix()));
    value_from(rho, &dephased, format!("dephasing{:?}", blocks.ranks()))
}

/// `Γ_out(ρ_out) − Γ_in(ρ_in)`; negative when asymmetry is lost.
pub fn delta_gamma<T: Real>(
    action_in: &SymmetryAction<T>,
    rho_in: &DensityOperator<T>,
    action_out: &SymmetryAction<T>,
    rho_out: &DensityOperator<T>,
) -> Result<T> {
    Ok(rel_ent_asymmetry(action_out, rho_out)?.gamma - rel_ent_asymmetry(action_in, rho_in)?.gamma)
}

/// `2^{−ΔΓ/2}`, clamped to 1 for negative increments.
pub fn fidelity_floor<T: Real>(delta_gamma: T) -> T {
    (T::lit(2.0).powf(-delta_gamma / T::lit(2.0))).min(T::one()).max(T::zero())
}
