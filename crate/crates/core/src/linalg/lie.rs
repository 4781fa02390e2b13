//! Brackets and the projections of the decomposition
//! gl(n) = {skew-symmetric} ⊕ {upper triangular}, together with the
//! Cartan involution and the quantities the flows are monitored with.

use serde::{Deserialize, Serialize};

use super::SquareMatrix;
use crate::error::{Error, Result};

/// `ab − ba`.
pub fn commutator(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(a.bracket(b))
}

/// Projection onto the skew-symmetric summand along the upper triangular
/// matrices: `X₋ − X₋ᵀ` with `X₋` the strictly lower part.
pub fn pi_k(x: &SquareMatrix) -> SquareMatrix {
    SquareMatrix::from_fn(x.n(), |i, j| {
        if i > j {
            x[(i, j)]
        } else if i < j {
            -x[(j, i)]
        } else {
            0.0
        }
    })
}

/// Complementary projection onto the upper triangular summand:
/// `diag(x) + upper(x) + lower(x)ᵀ`, written into the upper triangle.
pub fn pi_u(x: &SquareMatrix) -> SquareMatrix {
    SquareMatrix::from_fn(x.n(), |i, j| {
        if i < j {
            x[(i, j)] + x[(j, i)]
        } else if i == j {
            x[(i, i)]
        } else {
            0.0
        }
    })
}

/// Cartan involution on the algebra, `θX = −Xᵀ`.
pub fn theta(x: &SquareMatrix) -> SquareMatrix {
    SquareMatrix::from_fn(x.n(), |i, j| -x[(j, i)])
}

/// `trace(X Xᵀ)`. This is the trace form; the Killing form differs by the
/// positive constant 2n.
pub fn btheta_norm_sq(x: &SquareMatrix) -> f64 {
    x.as_slice().iter().map(|v| v * v).sum()
}

/// Power traces `trace(X^k)`, k = 1..=n. Two matrices with a common
/// witness have the same characteristic polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsospectralWitness {
    pub power_traces: Vec<f64>,
}

impl IsospectralWitness {
    /// Largest relative change between two witnesses; each power trace is
    /// scaled by `max(|p_k|, 1)` of `self`.
    pub fn max_relative_drift(&self, other: &IsospectralWitness) -> f64 {
        self.power_traces
            .iter()
            .zip(&other.power_traces)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

pub fn isospectral_witness(x: &SquareMatrix) -> IsospectralWitness {
    let n = x.n();
    let mut power = x.clone();
    let mut power_traces = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            power = &power * x;
        }
        power_traces.push(power.trace());
    }
    IsospectralWitness { power_traces }
}
