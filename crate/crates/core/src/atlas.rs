//! Weyl-indexed charts of the flag manifold of symmetric matrices with a
//! fixed simple spectrum.
//!
//! Chart `w` sends a point `y = k·H^w·kᵀ` with `k = u·n̄·m` to the affine
//! point `n̄·H^w·n̄⁻¹ ∈ H^w + n̄`; the coordinates are the strictly lower
//! entries of that matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizations::{f_inverse, unbar_factorize};
use crate::linalg::{symmetric_eigen, Spectrum, SquareMatrix};
use crate::weyl::{conjugate_by, inversion_sets, InversionSets, Permutation};

/// Trailing minors at or below this magnitude put a point outside a chart.
pub const DOMAIN_TOL: f64 = 1e-11;
/// Tolerance on `b − H^w` being strictly lower triangular.
pub const FIBER_TOL: f64 = 1e-12;
/// Tolerance when matching a given spectrum against computed eigenvalues.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// A point of the flag manifold: a symmetric matrix with its spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlagPointLiteral")]
pub struct FlagPoint {
    y: SquareMatrix,
    h: Spectrum,
}

#[derive(Deserialize)]
struct FlagPointLiteral {
    y: SquareMatrix,
    h: Option<Spectrum>,
}

impl TryFrom<FlagPointLiteral> for FlagPoint {
    type Error = Error;
    fn try_from(lit: FlagPointLiteral) -> Result<Self> {
        match lit.h {
            Some(h) => FlagPoint::with_spectrum(lit.y, h),
            None => FlagPoint::new(lit.y),
        }
    }
}

impl FlagPoint {
    /// Computes the spectrum; rejects non-symmetric or degenerate input.
    pub fn new(y: SquareMatrix) -> Result<Self> {
        let (h, _) = symmetric_eigen(&y)?;
        Ok(FlagPoint { y, h })
    }

    /// Checks that the eigenvalues of `y` are `h` within `1e-8`.
    pub fn with_spectrum(y: SquareMatrix, h: Spectrum) -> Result<Self> {
        if y.n() != h.n() {
            return Err(Error::DimensionMismatch {
                left: y.n(),
                right: h.n(),
            });
        }
        let (computed, _) = symmetric_eigen(&y)?;
        let worst = computed
            .values()
            .iter()
            .zip(h.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if worst > SPECTRUM_TOL {
            return Err(Error::InvalidFlagPoint(format!(
                "eigenvalues {:?} differ from the given spectrum by {worst:e}",
                computed.values()
            )));
        }
        Ok(FlagPoint { y, h })
    }

    pub fn y(&self) -> &SquareMatrix {
        &self.y
    }

    pub fn h(&self) -> &Spectrum {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.y.n()
    }
}

/// Coordinates in chart `w`: the strictly lower matrix `b − H^w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartCoordsLiteral", into = "ChartCoordsLiteral")]
pub struct ChartCoords {
    w: Permutation,
    lower: SquareMatrix,
    h: Spectrum,
}

/// JSON shape `{"w": [..], "h": [..], "lower": matrix}`.
#[derive(Clone, Serialize, Deserialize)]
pub struct ChartCoordsLiteral {
    pub w: Permutation,
    pub h: Spectrum,
    pub lower: SquareMatrix,
}

impl TryFrom<ChartCoordsLiteral> for ChartCoords {
    type Error = Error;
    fn try_from(lit: ChartCoordsLiteral) -> Result<Self> {
        ChartCoords::new(lit.w, lit.lower, lit.h)
    }
}

impl From<ChartCoords> for ChartCoordsLiteral {
    fn from(c: ChartCoords) -> Self {
        ChartCoordsLiteral {
            w: c.w,
            h: c.h,
            lower: c.lower,
        }
    }
}

impl ChartCoords {
    /// `lower` must vanish exactly on and above the diagonal.
    pub fn new(w: Permutation, lower: SquareMatrix, h: Spectrum) -> Result<Self> {
        for other in [w.n(), h.n()] {
            if lower.n() != other {
                return Err(Error::DimensionMismatch {
                    left: lower.n(),
                    right: other,
                });
            }
        }
        if lower.strictly_upper().max_abs() != 0.0 || lower.diagonal().iter().any(|&v| v != 0.0) {
            return Err(Error::MalformedMatrix(
                "chart coordinates must be strictly lower triangular".into(),
            ));
        }
        if !lower.is_finite() {
            return Err(Error::MalformedMatrix(
                "chart coordinates must be finite".into(),
            ));
        }
        Ok(ChartCoords { w, lower, h })
    }

    /// The chart origin H^w.
    pub fn origin(w: Permutation, h: Spectrum) -> Self {
        let n = w.n();
        ChartCoords {
            w,
            lower: SquareMatrix::zeros(n),
            h,
        }
    }

    /// Single coordinate `value` at the 0-based pair `(i, j)`, i > j.
    pub fn single(w: Permutation, h: Spectrum, (i, j): (usize, usize), value: f64) -> Result<Self> {
        let mut lower = SquareMatrix::zeros(w.n());
        if i <= j || i >= w.n() {
            return Err(Error::MalformedMatrix(format!(
                "({}, {}) is not a strictly lower position",
                i + 1,
                j + 1
            )));
        }
        lower[(i, j)] = value;
        ChartCoords::new(w, lower, h)
    }

    pub fn w(&self) -> &Permutation {
        &self.w
    }

    pub fn lower(&self) -> &SquareMatrix {
        &self.lower
    }

    pub fn h(&self) -> &Spectrum {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.lower.n()
    }

    /// The affine point `H^w + lower`.
    pub fn affine_point(&self) -> SquareMatrix {
        &h_conjugate(&self.h, &self.w) + &self.lower
    }

    pub(crate) fn with_lower(&self, lower: SquareMatrix) -> Self {
        ChartCoords {
            w: self.w.clone(),
            lower,
            h: self.h.clone(),
        }
    }
}

/// Ordered diagonal entries of H^w: entry i is `h[σ⁻¹(i)]`.
pub fn h_conjugate_diag(h: &Spectrum, w: &Permutation) -> Vec<f64> {
    let inv = w.inverse();
    (0..w.n()).map(|i| h.values()[inv.apply(i)]).collect()
}

/// H^w = P·diag(h)·Pᵀ.
pub fn h_conjugate(h: &Spectrum, w: &Permutation) -> SquareMatrix {
    SquareMatrix::diag(&h_conjugate_diag(h, w))
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// The unit lower `g` with `g·H^w·g⁻¹ = b`, by forward substitution on
/// `g_ij (hw_j − hw_i) = Σ_{k=j}^{i−1} b_ik g_kj`.
pub fn nbar_from_affine(b: &SquareMatrix, w: &Permutation, h: &Spectrum) -> Result<SquareMatrix> {
    check_dims(b.n(), w.n())?;
    check_dims(b.n(), h.n())?;
    let hw = h_conjugate_diag(h, w);
    let n = b.n();
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        deviation = deviation.max((b[(i, i)] - hw[i]).abs());
        for j in i + 1..n {
            deviation = deviation.max(b[(i, j)].abs());
        }
    }
    if deviation > FIBER_TOL {
        return Err(Error::NotInAffineFiber { deviation });
    }
    let mut g = SquareMatrix::identity(n);
    for j in 0..n {
        for i in j + 1..n {
            let s: f64 = (j..i).map(|k| b[(i, k)] * g[(k, j)]).sum();
            g[(i, j)] = s / (hw[j] - hw[i]);
        }
    }
    Ok(g)
}

/// φ_w⁻¹: coordinates to the flag point `k·H^w·kᵀ` with `k = f⁻¹(g)`.
pub fn chart_inverse(c: &ChartCoords) -> Result<FlagPoint> {
    let g = nbar_from_affine(&c.affine_point(), &c.w, &c.h)?;
    let k = f_inverse(&g)?;
    let hw = h_conjugate(&c.h, &c.w);
    let y = (&(&k * &hw) * &k.transpose()).symmetrize();
    Ok(FlagPoint { y, h: c.h.clone() })
}

/// Special orthogonal `k'` with `y = k'·H^w·k'ᵀ`. The eigenvector matrix
/// `Q` gets one column flipped when the permutation is odd, so that
/// `k' = Q·Pᵀ` has determinant one.
fn chart_frame(y: &FlagPoint, w: &Permutation) -> Result<SquareMatrix> {
    check_dims(y.n(), w.n())?;
    let (_, mut q) = symmetric_eigen(&y.y)?;
    let n = y.n();
    if w.length() % 2 == 1 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    // Q·Pᵀ permutes the columns of Q: column σ(j) of the result is column j of Q
    let mut k = SquareMatrix::zeros(n);
    for j in 0..n {
        let target = w.apply(j);
        for i in 0..n {
            k[(i, target)] = q[(i, j)];
        }
    }
    Ok(k)
}

/// First trailing minor of the chart frame with magnitude at most
/// `DOMAIN_TOL`, as `(size, value)`.
fn domain_violation(k: &SquareMatrix) -> Option<(usize, f64)> {
    (1..k.n())
        .map(|size| (size, k.trailing_minor(size)))
        .find(|(_, v)| v.abs() <= DOMAIN_TOL)
}

/// Whether `y` lies in the domain U_w of chart `w`.
pub fn chart_domain_test(y: &FlagPoint, w: &Permutation) -> Result<bool> {
    let k = chart_frame(y, w)?;
    Ok(domain_violation(&k).is_none())
}

/// φ_w: flag point to chart coordinates.
pub fn chart_forward(y: &FlagPoint, w: &Permutation) -> Result<ChartCoords> {
    let k = chart_frame(y, w)?;
    if let Some((minor_index, value)) = domain_violation(&k) {
        return Err(Error::ChartDomain {
            w: w.to_string(),
            minor_index,
            value,
        });
    }
    let f = unbar_factorize(&k)?;
    Ok(coords_from_nbar(&f.nbar, w, &y.h))
}

pub(crate) fn coords_from_nbar(nbar: &SquareMatrix, w: &Permutation, h: &Spectrum) -> ChartCoords {
    let hw = h_conjugate(h, w);
    let b = &(nbar * &hw) * &nbar.unit_lower_inverse();
    ChartCoords {
        w: w.clone(),
        lower: b.strictly_lower(),
        h: h.clone(),
    }
}

/// Index pairs spanning the chart images of the Bruhat cell (`unstable`)
/// and of the opposite cell (`stable`).
pub fn bruhat_affine_image(w: &Permutation) -> InversionSets {
    inversion_sets(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BruhatClass {
    InBruhat,
    InOpposite,
    Neither,
    Both,
}

/// Classifies `y` by which coordinates in chart `w` vanish (|c| ≤ tol).
pub fn bruhat_classify(y: &FlagPoint, w: &Permutation, tol: f64) -> Result<BruhatClass> {
    let c = chart_forward(y, w)?;
    let sets = bruhat_affine_image(w);
    let off_unstable = sets
        .stable
        .iter()
        .all(|&(i, j)| c.lower[(i, j)].abs() <= tol);
    let off_stable = sets
        .unstable
        .iter()
        .all(|&(i, j)| c.lower[(i, j)].abs() <= tol);
    Ok(match (off_unstable, off_stable) {
        (true, true) => BruhatClass::Both,
        (true, false) => BruhatClass::InBruhat,
        (false, true) => BruhatClass::InOpposite,
        (false, false) => BruhatClass::Neither,
    })
}

/// Conjugation by the permutation matrix of `w`, exposed for callers that
/// move between charts.
pub fn weyl_conjugate(w: &Permutation, x: &SquareMatrix) -> SquareMatrix {
    conjugate_by(w, x)
}
