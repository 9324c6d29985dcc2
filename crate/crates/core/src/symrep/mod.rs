//! Symmetry actions over registered subsystems and the twirling and
//! dephasing superoperators they induce.

mod action;
mod blocks;
mod symmetric;

pub use action::{
    cyclic_phase, number_operator, z2_phase_flip, ActionKind, Subsystem, SymmetryAction,
    SYMMETRIC_LEAK_TOL, UNITARY_TOL,
};
pub use blocks::{eigenblocks, EigenBlocks, DEGENERACY_REL_TOL};
pub use symmetric::{
    permutation_operator, sym_dim, symmetric_subspace_projector, MAX_SYMMETRIC_COPIES,
    MAX_SYMMETRIC_DIM,
};
