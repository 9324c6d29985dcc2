//! Dense complex linear algebra and quantum-state primitives.

mod eig;
mod measures;
mod operator;
mod state;
mod tensor;

pub use eig::{hermitian_eig, hermitian_eigenvalues, SpectralDecomposition};
pub use measures::{
    binary_entropy, entropy_of_spectrum, fidelity, func_on_support, imaginary_power,
    matrix_func_on_support, power_on_support, relative_entropy, shannon_entropy,
    support_projector, support_rank, support_threshold, trace_distance, trace_norm,
    von_neumann_entropy, RelEntropy, SUPPORT_CUTOFF, SUPPORT_LEAK_TOL,
};
pub use operator::Operator;
pub use state::{plus_state, DensityOperator, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
#[cfg(test)]
pub(crate) use state::uniform_vector;
pub use tensor::{embed, partial_trace, partial_trace_op, tensor, tensor_all};
