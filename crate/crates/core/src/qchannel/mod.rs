//! Quantum channels in Kraus form, their Choi matrices and covariance checks.

mod channel;
mod covariance;

pub use channel::{
    channel_from_choi, channels_equal, choi, choi_distance, compose, Channel, KrausMap,
    CHANNEL_EQ_TOL, KRAUS_WEIGHT_CUTOFF, TP_TOL,
};
pub(crate) use channel::state_kraus_weights;
pub use covariance::{
    append_symmetric_state, check_covariance, check_dephasing_covariance, discard_system,
    symmetrize, CovarianceReport, ElementViolation, COLLECTIVE_SAMPLES, COLLECTIVE_SEED,
    COVARIANCE_TOL, IDEMPOTENCE_TOL, SAMPLE_TIMES,
};
