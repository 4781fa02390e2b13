use serde::{Deserialize, Serialize};

use crate::atlas::{h_conjugate_diag, ChartCoords};
use crate::error::{Error, Result};
use crate::linalg::{pi_k, pi_u, SquareMatrix};
use crate::weyl::strictly_lower_pairs;

/// Largest exponent accepted by the exact chart flow.
pub const MAX_EXPONENT: f64 = 700.0;

/// Toda field `T(X) = [X, π_k X]`.
///
/// Evaluated as `[π_u X, X]`, which is the same matrix since
/// `X = π_k X + π_u X`. In this form every strictly lower entry outside a
/// profile is a sum of exact zeros whenever X lies in V_p.
pub fn toda_field(x: &SquareMatrix) -> SquareMatrix {
    pi_u(x).bracket(x)
}

/// Direct evaluation of `[X, π_k X]`, kept for cross-checks.
pub fn toda_field_direct(x: &SquareMatrix) -> SquareMatrix {
    x.bracket(&pi_k(x))
}

/// Symmetrization field `S(X) = [X, π_u[X, Xᵀ]]`.
pub fn sym_field(x: &SquareMatrix) -> SquareMatrix {
    let c = x.bracket(&x.transpose());
    x.bracket(&pi_u(&c))
}

/// The linear field `[H^w, ·]` on the chart: entry (i, j) is
/// `(hw_i − hw_j)·lower_ij`.
pub fn chart_linear_field(c: &ChartCoords) -> SquareMatrix {
    let hw = h_conjugate_diag(c.h(), c.w());
    let lower = c.lower();
    SquareMatrix::from_fn(c.n(), |i, j| {
        if i > j {
            (hw[i] - hw[j]) * lower[(i, j)]
        } else {
            0.0
        }
    })
}

/// Exact solution of the linear chart field after time `t`.
pub fn chart_flow_exact(c: &ChartCoords, t: f64) -> Result<ChartCoords> {
    let hw = h_conjugate_diag(c.h(), c.w());
    let n = c.n();
    let mut out = SquareMatrix::zeros(n);
    for (i, j) in strictly_lower_pairs(n) {
        let exponent = (hw[i] - hw[j]) * t;
        if exponent.abs() > MAX_EXPONENT {
            return Err(Error::Range { exponent });
        }
        out[(i, j)] = exponent.exp() * c.lower()[(i, j)];
    }
    Ok(c.with_lower(out))
}

/// The two isospectral fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Toda,
    Sym,
}

impl Field {
    pub fn eval(&self, x: &SquareMatrix) -> SquareMatrix {
        match self {
            Field::Toda => toda_field(x),
            Field::Sym => sym_field(x),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Field::Toda => "toda",
            Field::Sym => "sym",
        }
    }
}
