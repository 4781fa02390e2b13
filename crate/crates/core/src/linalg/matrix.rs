use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 12;

/// Dense n×n real matrix stored row-major.
///
/// Every group element (k, u, n̄, g) and algebra element (X, Y, H^w) in the
/// crate is carried by this type.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixLiteral", into = "MatrixLiteral")]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

/// JSON shape `{"n": int, "entries": [[row], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixLiteral> for SquareMatrix {
    type Error = Error;

    fn try_from(lit: MatrixLiteral) -> Result<Self> {
        if lit.entries.len() != lit.n {
            return Err(Error::MalformedMatrix(format!(
                "\"n\" is {} but {} rows were given",
                lit.n,
                lit.entries.len()
            )));
        }
        SquareMatrix::from_rows(&lit.entries)
    }
}

impl From<SquareMatrix> for MatrixLiteral {
    fn from(m: SquareMatrix) -> Self {
        MatrixLiteral {
            n: m.n,
            entries: m.rows(),
        }
    }
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Validated constructor: square, 2 ≤ n ≤ 12, all entries finite.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::MalformedMatrix(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row: i + 1,
                        col: j + 1,
                    });
                }
                data.push(v);
            }
        }
        Ok(SquareMatrix { n, data })
    }

    /// Elementary matrix E_ij (0-based).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m[(i, j)] = 1.0;
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius distance.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self·other − other·self`, panicking on a dimension mismatch.
    pub fn bracket(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest |x_ij − x_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrize(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    /// Strictly lower part, exact zeros elsewhere.
    pub fn strictly_lower(&self) -> Self {
        Self::from_fn(self.n, |i, j| if i > j { self[(i, j)] } else { 0.0 })
    }

    /// Strictly upper part, exact zeros elsewhere.
    pub fn strictly_upper(&self) -> Self {
        Self::from_fn(self.n, |i, j| if i < j { self[(i, j)] } else { 0.0 })
    }

    /// Largest magnitude of a strictly lower entry.
    pub fn lower_max_abs(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max(self[(i, j)].abs());
            }
        }
        worst
    }

    /// Largest magnitude of an off-diagonal entry.
    pub fn off_diagonal_max_abs(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    worst = worst.max(self[(i, j)].abs());
                }
            }
        }
        worst
    }

    /// Deviation from unit lower triangular form (max over offending entries).
    pub fn unit_lower_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            worst = worst.max((self[(i, i)] - 1.0).abs());
            for j in i + 1..self.n {
                worst = worst.max(self[(i, j)].abs());
            }
        }
        worst
    }

    /// ‖XᵀX − I‖_F.
    pub fn orthogonality_residual(&self) -> f64 {
        (&(&self.transpose() * self) - &Self::identity(self.n)).norm()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
                .unwrap();
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                if factor != 0.0 {
                    for k in col..n {
                        a[r * n + k] -= factor * a[col * n + k];
                    }
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        let scale = self.max_abs();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
                .unwrap();
            if a[pivot * n + col].abs() <= f64::EPSILON * scale * n as f64 {
                return Err(Error::Singular);
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                    inv.swap(pivot * n + k, col * n + k);
                }
            }
            let p = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= p;
                inv[col * n + k] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col];
                if factor != 0.0 {
                    for k in 0..n {
                        a[r * n + k] -= factor * a[col * n + k];
                        inv[r * n + k] -= factor * inv[col * n + k];
                    }
                }
            }
        }
        Ok(SquareMatrix { n, data: inv })
    }

    /// Inverse of a unit lower triangular matrix by forward substitution.
    /// Only the strictly lower part of `self` is read; the result is exactly
    /// unit lower triangular.
    pub fn unit_lower_inverse(&self) -> Self {
        let n = self.n;
        let mut inv = Self::identity(n);
        for j in 0..n {
            for i in j + 1..n {
                let mut s = 0.0;
                for k in j..i {
                    s += self[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = -s;
            }
        }
        inv
    }

    /// Determinant of the bottom-right `size`×`size` block.
    pub fn trailing_minor(&self, size: usize) -> f64 {
        let off = self.n - size;
        Self::from_fn(size, |i, j| self[(off + i, off + j)]).det()
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;

    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &SquareMatrix {
    type Output = SquareMatrix;

    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        SquareMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;

    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        SquareMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &SquareMatrix {
    type Output = SquareMatrix;

    fn neg(self) -> SquareMatrix {
        self.scale(-1.0)
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareMatrix({}x{}) [", self.n, self.n)?;
        for row in self.data.chunks(self.n) {
            write!(f, "  ")?;
            for v in row {
                write!(f, "{v:>13.6e} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_literal_round_trip() {
        let m = SquareMatrix::from_rows(&[[1.0, 2.5], [-3.0, 0.1]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"n":2,"entries":[[1.0,2.5],[-3.0,0.1]]}"#);
        let back: SquareMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_malformed_literals() {
        let ragged = r#"{"n":2,"entries":[[1.0,2.0],[3.0]]}"#;
        assert!(serde_json::from_str::<SquareMatrix>(ragged).is_err());
        let wrong_n = r#"{"n":3,"entries":[[1.0,2.0],[3.0,4.0]]}"#;
        assert!(serde_json::from_str::<SquareMatrix>(wrong_n).is_err());
        assert!(matches!(
            SquareMatrix::from_rows(&[[1.0]]),
            Err(Error::UnsupportedDimension(1))
        ));
        assert!(matches!(
            SquareMatrix::from_rows(&[[1.0, f64::NAN], [0.0, 1.0]]),
            Err(Error::NonFinite { row: 1, col: 2 })
        ));
    }

    #[test]
    fn det_and_inverse() {
        let m =
            SquareMatrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]).unwrap();
        assert!((m.det() - 18.0).abs() < 1e-12);
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).dist(&SquareMatrix::identity(3)) < 1e-14);
        let singular = SquareMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(singular.inverse(), Err(Error::Singular)));
    }

    #[test]
    fn unit_lower_inverse_is_exact_in_structure() {
        let g =
            SquareMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.3, 1.0, 0.0], [-2.0, 0.7, 1.0]]).unwrap();
        let inv = g.unit_lower_inverse();
        assert_eq!(inv.unit_lower_deviation(), 0.0);
        assert!((&g * &inv).dist(&SquareMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn trailing_minors() {
        let m =
            SquareMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]]).unwrap();
        assert_eq!(m.trailing_minor(1), 10.0);
        assert!((m.trailing_minor(2) - 2.0).abs() < 1e-12);
        assert!((m.trailing_minor(3) - m.det()).abs() < 1e-12);
    }
}
