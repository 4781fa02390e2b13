use serde_json::json;

use super::{worst_ratio, CheckReport, FD_STEP};
use crate::atlas::h_conjugate;
use crate::error::{Error, Result};
use crate::flows::{integrate, sym_field, Field, IntegratorConfig};
use crate::linalg::{general_eigenvalues, Spectrum, SquareMatrix, MAX_DIM};
use crate::weyl::Permutation;

pub const SPECTRUM_REL_TOL: f64 = 1e-5;
pub const FIBER_LIMIT_TOL: f64 = 1e-6;
/// Bound on forbidden (strictly lower) entries along upper-triangular runs.
pub const PROFILE_TOL: f64 = 1e-9;
pub const FRAME_TOL: f64 = 1e-6;

/// Finite-difference Jacobian of the symmetrization field at `diag(h)` on
/// the off-diagonal directions `E_ij`, with eigenvalues compared against
/// `−2(h_i − h_j)²` (one per pair) and a kernel of dimension n(n−1)/2.
///
/// The Jacobian has n(n−1) rows, so n ≤ 4.
pub fn sym_linearization_spectrum(h: &Spectrum) -> Result<CheckReport> {
    let n = h.n();
    let dirs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let m = dirs.len();
    if m > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    let base = h.to_diag();
    let mut jac = SquareMatrix::zeros(m);
    let mut diagonal_leak: f64 = 0.0;
    for (col, &(i, j)) in dirs.iter().enumerate() {
        let e = SquareMatrix::unit(n, i, j).scale(FD_STEP);
        let d = (&sym_field(&(&base + &e)) - &sym_field(&(&base - &e))).scale(0.5 / FD_STEP);
        for (row, &(k, l)) in dirs.iter().enumerate() {
            jac[(row, col)] = d[(k, l)];
        }
        for k in 0..n {
            diagonal_leak = diagonal_leak.max(d[(k, k)].abs());
        }
    }

    let mut eig = general_eigenvalues(&jac)?;
    eig.sort_by(|a, b| a.0.total_cmp(&b.0));
    let hv = h.values();
    let mut expected: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            expected.push(-2.0 * (hv[i] - hv[j]).powi(2));
        }
    }
    expected.sort_by(f64::total_cmp);
    let scale = expected.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let half = expected.len();

    let mut residual: f64 = 0.0;
    for (k, &want) in expected.iter().enumerate() {
        let (re, im) = eig[k];
        residual = residual.max((re - want).hypot(im) / want.abs());
    }
    let kernel: Vec<f64> = eig[half..]
        .iter()
        .map(|(re, im)| re.hypot(*im) / scale)
        .collect();
    residual = kernel.iter().fold(residual, |a, &v| a.max(v));
    let kernel_dim = eig
        .iter()
        .filter(|(re, im)| re.hypot(*im) <= 1e-6 * scale)
        .count();

    let details = json!({
        "h": hv,
        "expected_nonzero": expected,
        "eigenvalues": eig.iter().map(|(re, im)| [*re, *im]).collect::<Vec<_>>(),
        "kernel_dimension": kernel_dim,
        "expected_kernel_dimension": n * (n - 1) / 2,
        "diagonal_leak": diagonal_leak,
    });
    let residual = if kernel_dim == n * (n - 1) / 2 {
        residual
    } else {
        f64::MAX
    };
    Ok(CheckReport::new(
        "sym_linearization_spectrum",
        residual,
        SPECTRUM_REL_TOL,
        m,
        details,
    ))
}

/// Runs the symmetrization flow from `H^w + N` for each strictly upper
/// part `N` of the given perturbations and checks that it returns to `H^w`.
/// For the identity chart the runs must also stay upper triangular.
pub fn fiber_experiment(
    w: &Permutation,
    h: &Spectrum,
    cfg: &IntegratorConfig,
    perturbations: &[SquareMatrix],
) -> Result<CheckReport> {
    let hw = h_conjugate(h, w);
    let mut ratios = Vec::new();
    let mut runs = Vec::new();
    for p in perturbations {
        if p.n() != hw.n() {
            return Err(Error::DimensionMismatch {
                left: hw.n(),
                right: p.n(),
            });
        }
        let x0 = &hw + &p.strictly_upper();
        let traj = integrate(Field::Sym, &x0, cfg)?;
        let limit_distance = traj.last().dist(&hw);
        let forbidden = if w.is_identity() {
            traj.max_over_states(SquareMatrix::lower_max_abs)
        } else {
            0.0
        };
        ratios.push(worst_ratio(&[
            (limit_distance, FIBER_LIMIT_TOL),
            (forbidden, PROFILE_TOL),
            (traj.final_field_norm, cfg.stop_field_norm),
        ]));
        runs.push(json!({
            "limit_distance": limit_distance,
            "max_forbidden": forbidden,
            "final_time": traj.final_time(),
            "final_field_norm": traj.final_field_norm,
            "isospectral_drift": traj.isospectral_drift(),
        }));
    }
    let details = json!({ "w": w.to_string(), "h": h.values(), "runs": runs });
    Ok(CheckReport::from_samples("fiber", &ratios, 1.0, details))
}

/// The matrix `[[x, y − z], [y + z, −x]]`.
pub fn sl2_from_coords(p: [f64; 3]) -> SquareMatrix {
    let [x, y, z] = p;
    SquareMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 0) => x,
        (0, 1) => y - z,
        (1, 0) => y + z,
        _ => -x,
    })
}

/// Inverse of [`sl2_from_coords`] on traceless 2×2 matrices.
pub fn sl2_coords(m: &SquareMatrix) -> [f64; 3] {
    [
        m[(0, 0)],
        0.5 * (m[(0, 1)] + m[(1, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    ]
}

/// The symmetrization field on sl(2) in the coordinates of [`sl2_from_coords`].
pub fn sym_field_sl2(p: [f64; 3]) -> [f64; 3] {
    sl2_coords(&sym_field(&sl2_from_coords(p)))
}

fn jacobian_sl2(p: [f64; 3]) -> [[f64; 3]; 3] {
    let mut jac = [[0.0; 3]; 3];
    for col in 0..3 {
        let (mut plus, mut minus) = (p, p);
        plus[col] += FD_STEP;
        minus[col] -= FD_STEP;
        let (fp, fm) = (sym_field_sl2(plus), sym_field_sl2(minus));
        for row in 0..3 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * FD_STEP);
        }
    }
    jac
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Sine of the angle between `a` and `b`.
fn collinearity(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    norm3(cross) / (norm3(a) * norm3(b))
}

/// On the circle `x² + y² = λ²`, `z = 0` (λ = 2, 16 points) the linearized
/// field applied to `(y, −x, λ)` must be parallel to `(xy, −x², x² + y²)`.
pub fn sl2_frame_check() -> CheckReport {
    let lambda = 2.0;
    let samples = 16;
    let mut residuals = Vec::with_capacity(samples);
    let mut points = Vec::with_capacity(samples);
    for k in 0..samples {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let (x, y) = (lambda * angle.cos(), lambda * angle.sin());
        let jac = jacobian_sl2([x, y, 0.0]);
        let frame = [y, -x, lambda];
        let image: [f64; 3] = std::array::from_fn(|r| (0..3).map(|c| jac[r][c] * frame[c]).sum());
        let vertical = [x * y, -x * x, x * x + y * y];
        let r = collinearity(image, vertical);
        residuals.push(r);
        points.push(json!({ "point": [x, y, 0.0], "image": image, "collinearity": r }));
    }
    CheckReport::from_samples(
        "sym.sl2_frame",
        &residuals,
        FRAME_TOL,
        json!({ "lambda": lambda, "points": points }),
    )
}
