use serde::{Deserialize, Serialize};

use crate::asymmetry::fidelity_floor;
use crate::error::{Error, Result};
use crate::opcore::binary_entropy;
use crate::scalar::Real;

/// Which of the two trace-distance floors is larger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingBound {
    Implicit,
    Explicit,
}

/// Limits on how well an asymmetry increase `ΔΓ` can be realized by any
/// covariant channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundsRecord<T: Real> {
    pub delta_gamma: T,
    #[serde(rename = "rank_DY")]
    pub rank_dy: usize,
    /// Smallest `ε ∈ [0,1]` with `ε log₂ D_Y + 2H(ε/2) ≥ ΔΓ`.
    pub epsilon_floor: T,
    /// `(ΔΓ / (3 log₂ D_Y))²`; undefined for `D_Y = 1`.
    pub epsilon_floor_explicit: Option<T>,
    pub binding: BindingBound,
    pub fidelity_floor: T,
    /// `√(1 − ε²/4)` from `½‖ρ₁ − ρ₂‖₁ ≤ √(1 − F²)`.
    pub fidelity_ceiling: T,
}

/// `ε log₂ D + 2H(ε/2)`.
pub fn accuracy_lhs<T: Real>(epsilon: T, rank_dy: usize) -> T {
    let half = (epsilon / T::lit(2.0)).max(T::zero()).min(T::one());
    epsilon * T::from_count(rank_dy).log2() + T::lit(2.0) * binary_entropy(half).unwrap_or(T::zero())
}

pub fn accuracy_upper_bound<T: Real>(delta_gamma: T, rank_dy: usize) -> Result<BoundsRecord<T>> {
    if rank_dy < 1 {
        return Err(Error::OutOfRange("rank D_Y must be at least 1".into()));
    }
    if !delta_gamma.is_finite() {
        return Err(Error::NonFinite);
    }
    let epsilon_floor = if delta_gamma <= T::zero() {
        T::zero()
    } else if accuracy_lhs(T::one(), rank_dy) <= delta_gamma {
        T::one()
    } else {
        // LHS is strictly increasing on [0, 1].
        let (mut lo, mut hi) = (T::zero(), T::one());
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if accuracy_lhs(mid, rank_dy) < delta_gamma {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() {
                break;
            }
        }
        hi
    };
    let epsilon_floor_explicit = (rank_dy > 1).then(|| {
        let x = delta_gamma.max(T::zero()) / (T::lit(3.0) * T::from_count(rank_dy).log2());
        x * x
    });
    let binding = match epsilon_floor_explicit {
        Some(e) if e > epsilon_floor => BindingBound::Explicit,
        _ => BindingBound::Implicit,
    };
    let fidelity_ceiling = (T::one() - epsilon_floor * epsilon_floor / T::lit(4.0)).sqrt();
    Ok(BoundsRecord {
        delta_gamma,
        rank_dy,
        epsilon_floor,
        epsilon_floor_explicit,
        binding,
        fidelity_floor: fidelity_floor(delta_gamma),
        fidelity_ceiling,
    })
}
