//! Resource theory of asymmetry: twirling, relative entropy of asymmetry and
//! coherence, accuracy bounds, Petz and rotated Petz recovery.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

pub mod asymmetry;
pub mod error;
pub mod opcore;
pub mod qchannel;
pub mod random;
pub mod recovery;
pub mod report;
pub mod scalar;
pub mod showcase;
pub mod symrep;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Operator = opcore::Operator<f64>;
pub type DensityOperator = opcore::DensityOperator<f64>;
pub type Channel = qchannel::Channel<f64>;
pub type SymmetryAction = symrep::SymmetryAction<f64>;

pub type OperatorF32 = opcore::Operator<f32>;
pub type DensityOperatorF32 = opcore::DensityOperator<f32>;
