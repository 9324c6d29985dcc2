//! Relative entropy of asymmetry and of coherence, accuracy bounds for
//! covariant transformations, and the classical-reference CMI construction.

mod bounds;
mod cmi;
mod gamma;

pub use bounds::{accuracy_lhs, accuracy_upper_bound, BindingBound, BoundsRecord};
pub use cmi::{build_sigma_crs, conditional_mutual_information, mutual_information, MAX_SIGMA_DIM};
pub use gamma::{delta_gamma, fidelity_floor, rel_ent_asymmetry, rel_ent_coherence, AsymmetryValue};
