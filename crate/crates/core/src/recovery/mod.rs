//! Petz and rotated Petz recovery maps, the rotation search and the
//! reversibility harnesses built on them.

mod harness;
mod petz;
mod search;

pub use harness::{
    catalytic_recovery, catalytic_spec, verify_dephasing_recovery, verify_reversibility, ReversibilityReport,
    RECOVERY_COVARIANCE_TOL,
};
pub(crate) use petz::route_to_state;
pub use petz::{petz_map, rotated_petz, RecoverySpec};
pub use search::{best_t_search, RecoveryResult, SearchOptions, TIE_TOL};
