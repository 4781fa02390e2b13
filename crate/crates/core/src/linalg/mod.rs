//! Dense small-matrix primitives.

mod eigen;
mod lie;
mod matrix;

pub use eigen::{
    general_eigenvalues, jacobi_eigen, symmetric_eigen, Spectrum, JACOBI_MAX_SWEEPS, JACOBI_TOL,
    REGULARITY_GAP, SYMMETRY_TOL,
};
pub use lie::{
    btheta_norm_sq, commutator, isospectral_witness, pi_k, pi_u, theta, IsospectralWitness,
};
pub use matrix::{MatrixLiteral, SquareMatrix, MAX_DIM, MIN_DIM};
