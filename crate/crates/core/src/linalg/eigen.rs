//! Symmetric eigendecomposition by cyclic Jacobi rotations, plus a general
//! real eigenvalue routine (Hessenberg reduction and Francis double-shift
//! QR) used for the nonsymmetric Jacobians in the analysis module.

use serde::{Deserialize, Serialize};

use super::SquareMatrix;
use crate::error::{Error, Result};

/// Off-diagonal threshold of the Jacobi sweeps, relative to the Frobenius
/// norm of the input.
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 50;
/// Smallest admissible gap between consecutive eigenvalues.
pub const REGULARITY_GAP: f64 = 1e-8;
/// Symmetry tolerance of `symmetric_eigen`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// A regular element of the positive Weyl chamber: strictly decreasing
/// values summing to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < super::MIN_DIM || values.len() > super::MAX_DIM {
            return Err(Error::UnsupportedDimension(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite value".into()));
        }
        for (i, pair) in values.windows(2).enumerate() {
            if pair[0] <= pair[1] {
                return Err(Error::InvalidSpectrum(format!(
                    "values must be strictly decreasing, but entry {} ({}) <= entry {} ({})",
                    i + 1,
                    pair[0],
                    i + 2,
                    pair[1]
                )));
            }
        }
        let sum: f64 = values.iter().sum();
        if sum.abs() > 1e-12 {
            return Err(Error::InvalidSpectrum(format!(
                "values must sum to zero, got {sum:e}"
            )));
        }
        Ok(Spectrum { values })
    }

    /// Parses a comma-separated list such as `"2,0,-2"`.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidSpectrum(format!("cannot parse {:?} as a number", s.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Spectrum::new(values)
    }

    /// Evenly spaced spectrum `(n−1, n−3, …, −(n−1))`.
    pub fn standard(n: usize) -> Result<Self> {
        Spectrum::new((0..n).map(|i| (n - 1) as f64 - 2.0 * i as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Smallest gap between consecutive values.
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|p| p[0] - p[1])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_diag(&self) -> SquareMatrix {
        SquareMatrix::diag(&self.values)
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Spectrum::new(values)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Vec<f64> {
        s.values
    }
}

/// Cyclic Jacobi on a symmetric matrix (only the upper triangle is read).
/// Returns eigenvalues in decreasing order and an orthogonal `Q` with
/// `det Q = +1` whose columns are the matching eigenvectors.
pub fn jacobi_eigen(y: &SquareMatrix) -> Result<(Vec<f64>, SquareMatrix)> {
    let n = y.n();
    let mut a = y.symmetrize();
    let mut v = SquareMatrix::identity(n);
    let scale = a.norm();
    let threshold = JACOBI_TOL * if scale > 0.0 { scale } else { 1.0 };

    let off = |a: &SquareMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&a) <= threshold;
    let mut sweep = 0;
    while !converged && sweep < JACOBI_MAX_SWEEPS {
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        converged = off(&a) <= threshold;
    }
    if !converged {
        return Err(Error::EigenNotConverged { off: off(&a) });
    }

    let diag = a.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut q = SquareMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    if q.det() < 0.0 {
        for r in 0..n {
            q[(r, n - 1)] = -q[(r, n - 1)];
        }
    }
    Ok((values, q))
}

/// Eigendecomposition `y = Q·diag(λ)·Qᵀ` of a traceless symmetric matrix
/// with simple spectrum. `Q` is special orthogonal and `λ` decreasing.
///
/// The computed values are shifted by their mean so that they sum to zero
/// exactly; the input must be traceless up to `1e-10·max(1, ‖y‖)`.
pub fn symmetric_eigen(y: &SquareMatrix) -> Result<(Spectrum, SquareMatrix)> {
    let asymmetry = y.asymmetry();
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let trace = y.trace();
    if trace.abs() > 1e-10 * y.norm().max(1.0) {
        return Err(Error::InvalidSpectrum(format!(
            "matrix is not traceless (trace {trace:e})"
        )));
    }
    let (mut values, q) = jacobi_eigen(y)?;
    let gap = values
        .windows(2)
        .map(|p| p[0] - p[1])
        .fold(f64::INFINITY, f64::min);
    if gap <= REGULARITY_GAP {
        return Err(Error::EigenvalueCollision { gap });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in &mut values {
        *v -= mean;
    }
    Ok((Spectrum::new(values)?, q))
}

/// All eigenvalues of a general real matrix as `(re, im)` pairs, sorted by
/// real part (descending) and then by imaginary part.
pub fn general_eigenvalues(a: &SquareMatrix) -> Result<Vec<(f64, f64)>> {
    let n = a.n();
    let mut h = hessenberg(a);
    let mut out = hqr(&mut h, n)?;
    out.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)));
    Ok(out)
}

/// Orthogonal similarity to upper Hessenberg form by Householder reflectors.
fn hessenberg(a: &SquareMatrix) -> SquareMatrix {
    let n = a.n();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n)
            .map(|i| h[(i, k)] * h[(i, k)])
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if h[(k + 1, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in &mut v {
            *x /= vnorm;
        }
        // h ← (I − 2vvᵀ) h (I − 2vvᵀ) on the trailing block
        for j in 0..n {
            let dot: f64 = (0..v.len()).map(|r| v[r] * h[(k + 1 + r, j)]).sum();
            for r in 0..v.len() {
                h[(k + 1 + r, j)] -= 2.0 * v[r] * dot;
            }
        }
        for i in 0..n {
            let dot: f64 = (0..v.len()).map(|c| h[(i, k + 1 + c)] * v[c]).sum();
            for c in 0..v.len() {
                h[(i, k + 1 + c)] -= 2.0 * dot * v[c];
            }
        }
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    h
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn hqr(a: &mut SquareMatrix, n: usize) -> Result<Vec<(f64, f64)>> {
    const MAX_ITS: usize = 60;
    let eps = f64::EPSILON;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // look for a negligible subdiagonal entry
            let mut l = nu;
            while l > 0 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= eps * s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[(nu - 1, nu - 1)];
            let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = z;
                    wi[nu] = -z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITS {
                return Err(Error::EigenNotConverged {
                    off: a[(nu, nu - 1)].abs(),
                });
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let (mut p, mut q, mut r);
            let mut m = nu - 2;
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nu - 1 {
                a[(i + 2, i)] = 0.0;
                if i != m {
                    a[(i + 2, i - 1)] = 0.0;
                }
            }
            for k in m..nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nu - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[(k, k - 1)] = -a[(k, k - 1)];
                    }
                } else {
                    a[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                    if k != nu - 1 {
                        pp += r * a[(k + 2, j)];
                        a[(k + 2, j)] -= pp * z;
                    }
                    a[(k + 1, j)] -= pp * y;
                    a[(k, j)] -= pp * x;
                }
                let mmin = if nu < k + 3 { nu } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                    if k != nu - 1 {
                        pp += z * a[(i, k + 2)];
                        a[(i, k + 2)] -= pp * r;
                    }
                    a[(i, k + 1)] -= pp * q;
                    a[(i, k)] -= pp;
                }
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Characteristic polynomial coefficients `c` with
    /// `det(tI − A) = t^n + c[1] t^(n−1) + … + c[n]` (Faddeev-LeVerrier).
    fn char_poly(a: &SquareMatrix) -> Vec<f64> {
        let n = a.n();
        let mut c = vec![1.0; n + 1];
        let mut m = SquareMatrix::zeros(n);
        for k in 1..=n {
            m = &(a * &m) + &SquareMatrix::identity(n).scale(c[k - 1]);
            c[k] = -(a * &m).trace() / k as f64;
        }
        c
    }

    fn poly_eval(c: &[f64], t: f64) -> f64 {
        c.iter().fold(0.0, |acc, &ci| acc * t + ci)
    }

    /// Real roots of the characteristic polynomial by grid scan and bisection.
    fn roots_by_bisection(a: &SquareMatrix) -> Vec<f64> {
        let c = char_poly(a);
        let bound = a.norm() + 1.0;
        let steps = 20000;
        let mut roots = Vec::new();
        let mut prev_t = -bound;
        let mut prev_v = poly_eval(&c, prev_t);
        for s in 1..=steps {
            let t = -bound + 2.0 * bound * s as f64 / steps as f64;
            let v = poly_eval(&c, t);
            if prev_v == 0.0 {
                roots.push(prev_t);
            } else if prev_v.signum() != v.signum() && v != 0.0 {
                let (mut lo, mut hi) = (prev_t, t);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if poly_eval(&c, mid).signum() == poly_eval(&c, lo).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_t = t;
            prev_v = v;
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        roots
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![2.0, 0.0, -2.0]).is_ok());
        assert!(Spectrum::new(vec![0.0, 0.0]).is_err());
        assert!(Spectrum::new(vec![-1.0, 1.0]).is_err());
        assert!(Spectrum::new(vec![2.0, 0.0, -1.0]).is_err());
        assert!(Spectrum::new(vec![1.0]).is_err());
        assert_eq!(
            Spectrum::parse_csv("3, 1,-1,-3").unwrap().values(),
            &[3.0, 1.0, -1.0, -3.0]
        );
        assert!(Spectrum::parse_csv("3,x,-3").is_err());
        assert_eq!(Spectrum::standard(3).unwrap().values(), &[2.0, 0.0, -2.0]);
        let json = serde_json::to_string(&Spectrum::standard(2).unwrap()).unwrap();
        assert_eq!(json, "[1.0,-1.0]");
        assert!(serde_json::from_str::<Spectrum>("[1.0,2.0]").is_err());
    }

    #[test]
    fn diagonal_input() {
        let (s, q) = symmetric_eigen(&SquareMatrix::diag(&[3.0, 1.0, -4.0])).unwrap();
        assert_eq!(s.values(), &[3.0, 1.0, -4.0]);
        assert_eq!(q, SquareMatrix::identity(3));
    }

    #[test]
    fn two_by_two_closed_form() {
        for &(a, b) in &[(0.3, 0.4), (-1.0, 2.0), (5.0, -0.1), (0.0, 1.0)] {
            let y = SquareMatrix::from_rows(&[[a, b], [b, -a]]).unwrap();
            let (s, q) = symmetric_eigen(&y).unwrap();
            let r = f64::hypot(a, b);
            assert!((s.values()[0] - r).abs() < 1e-14);
            assert!((s.values()[1] + r).abs() < 1e-14);
            assert!((q.det() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn random_symmetric_against_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 4] {
            for _ in 0..10 {
                let y = sampling::traceless_symmetric(n, &mut rng);
                let (s, q) = symmetric_eigen(&y).unwrap();
                let oracle = roots_by_bisection(&y);
                assert_eq!(oracle.len(), n);
                for (a, b) in s.values().iter().zip(&oracle) {
                    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                }
                let recon = &(&q * &s.to_diag()) * &q.transpose();
                assert!(recon.dist(&y) < 1e-10);
                assert!(q.orthogonality_residual() < 1e-12);
                assert!((q.det() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let y = SquareMatrix::from_rows(&[[1.0, 2.0], [2.1, -1.0]]).unwrap();
        assert!(matches!(
            symmetric_eigen(&y),
            Err(Error::NotSymmetric { .. })
        ));
        let z = SquareMatrix::zeros(3);
        assert!(matches!(
            symmetric_eigen(&z),
            Err(Error::EigenvalueCollision { .. })
        ));
        let d = SquareMatrix::diag(&[1.0, 1.0, -2.0]);
        assert!(matches!(
            symmetric_eigen(&d),
            Err(Error::EigenvalueCollision { .. })
        ));
        let t = SquareMatrix::diag(&[2.0, 1.0]);
        assert!(matches!(
            symmetric_eigen(&t),
            Err(Error::InvalidSpectrum(_))
        ));
    }

    #[test]
    fn larger_dimensions_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [6, 9, 12] {
            let y = sampling::traceless_symmetric(n, &mut rng);
            let (s, q) = symmetric_eigen(&y).unwrap();
            let recon = &(&q * &s.to_diag()) * &q.transpose();
            assert!(recon.dist(&y) < 1e-10);
            assert!(q.orthogonality_residual() < 1e-12);
        }
    }

    #[test]
    fn general_eigenvalues_of_symmetric_match_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [2, 3, 5, 8, 12] {
            let y = sampling::traceless_symmetric(n, &mut rng);
            let (vals, _) = jacobi_eigen(&y).unwrap();
            let ev = general_eigenvalues(&y).unwrap();
            for ((re, im), v) in ev.iter().zip(&vals) {
                assert!(im.abs() < 1e-12);
                assert!((re - v).abs() < 1e-10, "{re} vs {v}");
            }
        }
    }

    #[test]
    fn general_eigenvalues_complex_and_defective() {
        let rot = SquareMatrix::from_rows(&[[0.0, -2.0], [2.0, 0.0]]).unwrap();
        let ev = general_eigenvalues(&rot).unwrap();
        assert!((ev[0].0).abs() < 1e-14 && (ev[0].1 + 2.0).abs() < 1e-14);
        assert!((ev[1].1 - 2.0).abs() < 1e-14);

        let upper =
            SquareMatrix::from_rows(&[[3.0, 1.0, 5.0], [0.0, -1.0, 2.0], [0.0, 0.0, 0.5]]).unwrap();
        let ev = general_eigenvalues(&upper).unwrap();
        let re: Vec<f64> = ev.iter().map(|e| e.0).collect();
        assert_eq!(re, vec![3.0, 0.5, -1.0]);

        // companion matrix of (t−1)(t−2)(t−3)(t+4)
        let c = [1.0, -2.0, -13.0, 38.0, -24.0];
        let comp = SquareMatrix::from_fn(4, |i, j| {
            if i == 0 {
                -c[j + 1]
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let ev = general_eigenvalues(&comp).unwrap();
        let expected = [3.0, 2.0, 1.0, -4.0];
        for (e, x) in ev.iter().zip(expected) {
            assert!((e.0 - x).abs() < 1e-10 && e.1.abs() < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn general_eigenvalues_of_similar_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in [3, 6, 10] {
            let d: Vec<f64> = (0..n).map(|i| (n as f64) - 1.7 * i as f64).collect();
            let g = sampling::unimodular_matrix(n, &mut rng);
            let a = &(&g * &SquareMatrix::diag(&d)) * &g.inverse().unwrap();
            let ev = general_eigenvalues(&a).unwrap();
            for (e, x) in ev.iter().zip(&d) {
                assert!((e.0 - x).abs() < 1e-8 && e.1.abs() < 1e-8, "{e:?} vs {x}");
            }
            let trace: f64 = ev.iter().map(|e| e.0).sum();
            assert!((trace - a.trace()).abs() < 1e-9);
        }
    }
}
