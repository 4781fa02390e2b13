use serde_json::json;

use super::CheckReport;
use crate::atlas::{chart_forward, ChartCoords, FlagPoint};
use crate::error::{Error, Result};
use crate::flows::{chart_linear_field, state_at, Field, IntegratorConfig};
use crate::weyl::Permutation;

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-5;
pub const PUSHFORWARD_TOL: f64 = 1e-6;
/// How often the step is halved when a displaced point leaves the chart.
pub const MAX_HALVINGS: usize = 3;

// One Dormand-Prince step covers |t| ≤ 1e-3, so these only matter for
// unusually large fd steps.
fn fd_config() -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        ..IntegratorConfig::default()
    }
}

fn displaced_coords(y: &FlagPoint, w: &Permutation, t: f64) -> Result<ChartCoords> {
    let x = state_at(Field::Toda, y.y(), t, &fd_config())?.symmetrize();
    chart_forward(&FlagPoint::with_spectrum(x, y.h().clone())?, w)
}

/// Frobenius distance between the central difference of `φ_w` along the
/// Toda flow through `y` and the linear chart field at `φ_w(y)`.
///
/// Returns the residual and the step actually used.
pub fn pushforward_residual(y: &FlagPoint, w: &Permutation, fd_step: f64) -> Result<(f64, f64)> {
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "fd_step must be positive, got {fd_step}"
        )));
    }
    let c0 = chart_forward(y, w)?;
    let linear = chart_linear_field(&c0);
    let mut step = fd_step;
    for _ in 0..=MAX_HALVINGS {
        match (displaced_coords(y, w, step), displaced_coords(y, w, -step)) {
            (Ok(plus), Ok(minus)) => {
                let fd = (plus.lower() - minus.lower()).scale(0.5 / step);
                return Ok((fd.dist(&linear), step));
            }
            (Err(Error::ChartDomain { .. }), _) | (_, Err(Error::ChartDomain { .. })) => {
                step *= 0.5
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Err(Error::FdDomainExit {
        halvings: MAX_HALVINGS,
    })
}

/// Checks that the chart `w` carries the Toda field at `y` to the linear
/// field `[H^w, ·]`.
pub fn pushforward_check(y: &FlagPoint, w: &Permutation, fd_step: f64) -> Result<CheckReport> {
    let (residual, used) = pushforward_residual(y, w, fd_step)?;
    let c = chart_forward(y, w)?;
    let details = json!({
        "w": w.to_string(),
        "n": y.n(),
        "fd_step": used,
        "linear_field_norm": chart_linear_field(&c).norm(),
    });
    Ok(CheckReport::new(
        "pushforward",
        residual,
        PUSHFORWARD_TOL,
        1,
        details,
    ))
}

/// Ratio of the pushforward residuals at `fd_step` and `fd_step / 2`,
/// which is 4 for a second-order difference. Passes when the ratio is
/// within 0.5 of 4.
pub fn pushforward_richardson(y: &FlagPoint, w: &Permutation, fd_step: f64) -> Result<CheckReport> {
    let (coarse, used) = pushforward_residual(y, w, fd_step)?;
    let (fine, _) = pushforward_residual(y, w, used / 2.0)?;
    let ratio = coarse / fine;
    let details = json!({
        "w": w.to_string(),
        "fd_step": used,
        "coarse": coarse,
        "fine": fine,
        "ratio": if ratio.is_finite() { Some(ratio) } else { None },
    });
    Ok(CheckReport::new(
        "pushforward_richardson",
        (ratio - 4.0).abs(),
        0.5,
        2,
        details,
    ))
}
