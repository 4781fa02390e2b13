use thiserror::Error;

use crate::flows::Trajectory;

/// Errors raised by the factorizations, charts and flows.
///
/// Index pairs and minor indices in messages are 1-based, matching the
/// usual matrix notation; everything inside the library is 0-based.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported dimension {0} (expected 2..=12)")]
    UnsupportedDimension(usize),

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("eigenvalue collision: gap {gap:e} below the regularity threshold")]
    EigenvalueCollision { gap: f64 },

    #[error("Jacobi sweeps did not converge (off-diagonal norm {off:e})")]
    EigenNotConverged { off: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("matrix is singular")]
    Singular,

    #[error("determinant {det} is not 1")]
    NotUnimodular { det: f64 },

    #[error("matrix is not special orthogonal (residual {residual:e}, det {det})")]
    NotSpecialOrthogonal { residual: f64, det: f64 },

    #[error("matrix is not unit lower triangular (deviation {deviation:e})")]
    NotUnitLowerTriangular { deviation: f64 },

    #[error("outside CM: trailing {minor_index}x{minor_index} minor vanishes")]
    OutsideCm { minor_index: usize },

    #[error("outside the big cell C: UN factorization needs sign factor {signs:?}")]
    OutsideBigCell { signs: Vec<f64> },

    #[error("input is not in L(sigma^-1) for sigma = {sigma}: entry ({row}, {col}) = {value:e}")]
    NotInLSigma {
        sigma: String,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("profile pair ({i}, {j}) is out of range for n = {n}")]
    ProfileOutOfRange { i: usize, j: usize, n: usize },

    #[error("profile violates axiom (a): pair ({i}, {j}) is not strictly lower")]
    ProfileAxiomA { i: usize, j: usize },

    #[error("profile violates axiom (b): ({i}, {j}) present but ({mi}, {mj}) missing")]
    ProfileAxiomB {
        i: usize,
        j: usize,
        mi: usize,
        mj: usize,
    },

    #[error("point is not in the affine fiber H^w + strictly lower (deviation {deviation:e})")]
    NotInAffineFiber { deviation: f64 },

    #[error("point outside chart {w}: trailing {minor_index}x{minor_index} minor is {value:e}")]
    ChartDomain {
        w: String,
        minor_index: usize,
        value: f64,
    },

    #[error("invalid flag point: {0}")]
    InvalidFlagPoint(String),

    #[error("exponent {exponent} exceeds the double-precision range")]
    Range { exponent: f64 },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at t = {t} (step {step:e})")]
    StepSizeUnderflow {
        t: f64,
        step: f64,
        partial: Box<Trajectory>,
    },

    #[error("no convergence by t = {t_max} (field norm {field_norm:e})")]
    Timeout {
        t_max: f64,
        field_norm: f64,
        partial: Box<Trajectory>,
    },

    #[error("limit is not {expected} (deviation {deviation:e})")]
    LimitShape {
        expected: &'static str,
        deviation: f64,
    },

    #[error("finite-difference step left the chart domain after {halvings} halvings")]
    FdDomainExit { halvings: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
