//! Numerical experiments that tie the charts to the flows.
//!
//! Every check returns a [`CheckReport`]. Residuals of the single-quantity
//! checks are in the units of that quantity; the flow experiments combine
//! several thresholds and report the largest ratio of a measured value to
//! its threshold, with tolerance 1.

mod cells;
mod pushforward;
mod suites;
mod symmetrization;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use cells::{
    unstable_manifold_experiment, CONVERGENCE_DISTANCE, CONVERGENCE_FIELD, ESCAPE_FACTOR,
};
pub use pushforward::{
    pushforward_check, pushforward_residual, pushforward_richardson, FD_STEP, MAX_HALVINGS,
    PUSHFORWARD_TOL,
};
pub use suites::{verify_suite, Suite};
pub use symmetrization::{
    fiber_experiment, sl2_coords, sl2_frame_check, sl2_from_coords, sym_field_sl2,
    sym_linearization_spectrum, FIBER_LIMIT_TOL, FRAME_TOL, PROFILE_TOL, SPECTRUM_REL_TOL,
};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    pub details: Value,
}

impl CheckReport {
    /// `passed` is `max_residual < tolerance`; NaN never passes.
    /// Non-finite residuals are stored as `f64::MAX` so reports stay valid JSON.
    pub fn new(
        name: impl Into<String>,
        max_residual: f64,
        tolerance: f64,
        samples: usize,
        details: Value,
    ) -> Self {
        let max_residual = if max_residual.is_finite() {
            max_residual
        } else {
            f64::MAX
        };
        CheckReport {
            name: name.into(),
            max_residual,
            tolerance,
            samples,
            passed: max_residual < tolerance,
            details,
        }
    }

    /// Report over several samples of the same quantity.
    pub fn from_samples(
        name: impl Into<String>,
        residuals: &[f64],
        tolerance: f64,
        details: Value,
    ) -> Self {
        let worst = residuals.iter().fold(0.0_f64, |acc, &r| {
            if r.is_nan() || acc.is_nan() {
                f64::NAN
            } else {
                acc.max(r)
            }
        });
        CheckReport::new(name, worst, tolerance, residuals.len(), details)
    }
}

/// Largest of `measured / threshold` over the given pairs.
pub(crate) fn worst_ratio(pairs: &[(f64, f64)]) -> f64 {
    pairs.iter().map(|(m, t)| m / t).fold(
        0.0,
        |acc: f64, r| if r.is_nan() { f64::MAX } else { acc.max(r) },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn pass_is_a_function_of_residual_and_tolerance() {
        assert!(CheckReport::new("a", 0.5, 1.0, 1, json!({})).passed);
        assert!(!CheckReport::new("a", 1.0, 1.0, 1, json!({})).passed);
        let nan = CheckReport::new("a", f64::NAN, 1.0, 1, json!({}));
        assert!(!nan.passed);
        assert_eq!(nan.max_residual, f64::MAX);
        let text = serde_json::to_string(&nan).unwrap();
        let back: CheckReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, nan);
        let agg = CheckReport::from_samples("b", &[1e-9, 3e-8, 2e-9], 1e-7, json!(null));
        assert_eq!((agg.samples, agg.max_residual, agg.passed), (3, 3e-8, true));
        assert!(!CheckReport::from_samples("b", &[1e-9, f64::NAN], 1e-7, json!(null)).passed);
    }

    #[test]
    fn ratios() {
        assert_eq!(worst_ratio(&[(1e-8, 1e-7), (5e-11, 1e-10)]), 0.5);
        assert_eq!(worst_ratio(&[]), 0.0);
        assert_eq!(worst_ratio(&[(f64::NAN, 1.0)]), f64::MAX);
    }
}
