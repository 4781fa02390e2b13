//! Iwasawa (Gram-Schmidt) and UN̄ factorizations, the big cell test, the
//! diffeomorphism f between the big cell and N̄, and the maps Φ, Φ(σ)
//! comparing the two factorizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::weyl::{conjugate_by, l_sigma_violation, Permutation};

/// Pivot magnitude below which the UN̄ factorization is declared impossible.
pub const PIVOT_TOL: f64 = 1e-13;
/// Tolerance on `det g = 1` for the Iwasawa factorization.
pub const UNIMODULAR_TOL: f64 = 1e-8;
/// Tolerance on orthogonality and `det k = 1` for the UN̄ factorization.
pub const ORTHOGONAL_TOL: f64 = 1e-10;
/// Tolerance for unit lower triangular inputs.
pub const UNIT_LOWER_TOL: f64 = 1e-12;

/// `g = k·a·n` with `k` special orthogonal, `a` positive diagonal and `n`
/// unit upper triangular.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KANFactors {
    pub k: SquareMatrix,
    pub a: SquareMatrix,
    pub n: SquareMatrix,
}

impl KANFactors {
    pub fn product(&self) -> SquareMatrix {
        &(&self.k * &self.a) * &self.n
    }
}

/// `k = u·n̄·m` with `u` upper triangular with positive diagonal, `n̄` unit
/// lower triangular and `m` a diagonal sign matrix of determinant one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UNbarFactors {
    pub u: SquareMatrix,
    pub nbar: SquareMatrix,
    pub m: SquareMatrix,
}

impl UNbarFactors {
    pub fn product(&self) -> SquareMatrix {
        &(&self.u * &self.nbar) * &self.m
    }

    pub fn signs(&self) -> Vec<f64> {
        self.m.diagonal()
    }

    pub fn m_is_identity(&self) -> bool {
        self.signs().iter().all(|&s| s == 1.0)
    }
}

/// Position of a special orthogonal matrix relative to the big cell C.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ChevalleyClass {
    InC,
    /// In C·M but not in C; carries the sign matrix `m`.
    InCMOnly(SquareMatrix),
    /// Not in C·M; carries the size of the first vanishing trailing minor.
    Outside(usize),
}

/// Iwasawa factorization by Householder QR with the signs of `R` made
/// positive. The columns of `k` are the Gram-Schmidt vectors of the
/// columns of `g`.
pub fn kan_factorize(g: &SquareMatrix) -> Result<KANFactors> {
    let det = g.det();
    if det == 0.0 {
        return Err(Error::Singular);
    }
    if (det - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular { det });
    }
    let n = g.n();
    let mut r = g.clone();
    let mut q = SquareMatrix::identity(n);
    for col in 0..n - 1 {
        let norm: f64 = (col..n)
            .map(|i| r[(i, col)] * r[(i, col)])
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return Err(Error::Singular);
        }
        let alpha = if r[(col, col)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (col..n).map(|i| r[(i, col)]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in &mut v {
            *x /= vnorm;
        }
        for j in col..n {
            let dot: f64 = (0..v.len()).map(|t| v[t] * r[(col + t, j)]).sum();
            for t in 0..v.len() {
                r[(col + t, j)] -= 2.0 * v[t] * dot;
            }
        }
        for i in 0..n {
            let dot: f64 = (0..v.len()).map(|t| q[(i, col + t)] * v[t]).sum();
            for t in 0..v.len() {
                q[(i, col + t)] -= 2.0 * dot * v[t];
            }
        }
    }
    for i in 0..n {
        if r[(i, i)] == 0.0 {
            return Err(Error::Singular);
        }
        if r[(i, i)] < 0.0 {
            for j in 0..n {
                r[(i, j)] = -r[(i, j)];
                q[(j, i)] = -q[(j, i)];
            }
        }
    }
    let diag = r.diagonal();
    let a = SquareMatrix::diag(&diag);
    let upper = SquareMatrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => r[(i, j)] / diag[i],
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => 0.0,
    });
    Ok(KANFactors { k: q, a, n: upper })
}

fn check_special_orthogonal(k: &SquareMatrix) -> Result<()> {
    let residual = k.orthogonality_residual();
    let det = k.det();
    if residual > ORTHOGONAL_TOL || (det - 1.0).abs() > ORTHOGONAL_TOL {
        return Err(Error::NotSpecialOrthogonal { residual, det });
    }
    Ok(())
}

fn check_unit_lower(g: &SquareMatrix) -> Result<()> {
    let deviation = g.unit_lower_deviation();
    if deviation > UNIT_LOWER_TOL {
        return Err(Error::NotUnitLowerTriangular { deviation });
    }
    Ok(())
}

/// `J·x·J` with `J` the antidiagonal flip: entry (i, j) ↦ (n−1−i, n−1−j).
fn flip(x: &SquareMatrix) -> SquareMatrix {
    let n = x.n();
    SquareMatrix::from_fn(n, |i, j| x[(n - 1 - i, n - 1 - j)])
}

/// UN̄ factorization of a special orthogonal matrix at the level of C·M.
///
/// Crout elimination of `JkJ = L·U₁` (unit upper `U₁`); the pivots are the
/// ratios of consecutive trailing principal minors of `k`. With
/// `d = sign(diag L)`: `u = J(Ld)J`, `n̄ = J(dU₁d)J`, `m = JdJ`.
pub fn unbar_factorize(k: &SquareMatrix) -> Result<UNbarFactors> {
    check_special_orthogonal(k)?;
    let n = k.n();
    let a = flip(k);
    let mut l = SquareMatrix::zeros(n);
    let mut u1 = SquareMatrix::identity(n);
    for j in 0..n {
        for i in j..n {
            let s: f64 = (0..j).map(|t| l[(i, t)] * u1[(t, j)]).sum();
            l[(i, j)] = a[(i, j)] - s;
        }
        let pivot = l[(j, j)];
        if pivot.abs() < PIVOT_TOL {
            return Err(Error::OutsideCm { minor_index: j + 1 });
        }
        for i in j + 1..n {
            let s: f64 = (0..j).map(|t| l[(j, t)] * u1[(t, i)]).sum();
            u1[(j, i)] = (a[(j, i)] - s) / pivot;
        }
    }
    let d: Vec<f64> = (0..n).map(|i| l[(i, i)].signum()).collect();
    let ld = SquareMatrix::from_fn(n, |i, j| if i >= j { l[(i, j)] * d[j] } else { 0.0 });
    let dud = SquareMatrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => d[i] * u1[(i, j)] * d[j],
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => 0.0,
    });
    let mut m_diag = d.clone();
    m_diag.reverse();
    let m = SquareMatrix::diag(&m_diag);
    let sign_product: f64 = m_diag.iter().product();
    assert_eq!(
        sign_product, 1.0,
        "sign factor with det -1 from a special orthogonal input"
    );
    Ok(UNbarFactors {
        u: flip(&ld),
        nbar: flip(&dud),
        m,
    })
}

/// Classifies a special orthogonal matrix against the big cell C.
pub fn chevalley_test(k: &SquareMatrix) -> Result<ChevalleyClass> {
    match unbar_factorize(k) {
        Ok(f) if f.m_is_identity() => Ok(ChevalleyClass::InC),
        Ok(f) => Ok(ChevalleyClass::InCMOnly(f.m)),
        Err(Error::OutsideCm { minor_index }) => Ok(ChevalleyClass::Outside(minor_index)),
        Err(e) => Err(e),
    }
}

/// f: C → N̄, the N̄ component of `k = u·n̄`.
pub fn f_map(k: &SquareMatrix) -> Result<SquareMatrix> {
    let f = unbar_factorize(k)?;
    if !f.m_is_identity() {
        return Err(Error::OutsideBigCell { signs: f.signs() });
    }
    Ok(f.nbar)
}

/// Inverse of f: the transposed orthogonal factor of the Gram-Schmidt
/// factorization of `n̄⁻¹`.
pub fn f_inverse(nbar: &SquareMatrix) -> Result<SquareMatrix> {
    check_unit_lower(nbar)?;
    Ok(kan_factorize(&nbar.unit_lower_inverse())?.k.transpose())
}

/// Gram-Schmidt embedding N̄ → K, the orthogonal factor of `g = k·a·n`.
pub fn gs_embed(g: &SquareMatrix) -> Result<SquareMatrix> {
    check_unit_lower(g)?;
    Ok(kan_factorize(g)?.k)
}

/// Φ = f ∘ gs_embed, comparing the LU and UL factorizations on N̄.
pub fn phi(g: &SquareMatrix) -> Result<SquareMatrix> {
    let k = gs_embed(g)?;
    Ok(f_map(&k).expect("the Gram-Schmidt embedding lands in the big cell"))
}

/// Φ(σ): L(σ⁻¹) → L(σ), `g ↦ f(P·gs_embed(g)·Pᵀ)` with `P` the matrix of σ⁻¹.
pub fn phi_sigma(sigma: &Permutation, g: &SquareMatrix) -> Result<SquareMatrix> {
    if g.n() != sigma.n() {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: sigma.n(),
        });
    }
    check_unit_lower(g)?;
    if let Some(((row, col), value)) = l_sigma_violation(g, &sigma.inverse(), UNIT_LOWER_TOL) {
        return Err(Error::NotInLSigma {
            sigma: sigma.to_string(),
            row: row + 1,
            col: col + 1,
            value,
        });
    }
    // conjugate by the permutation that carries L(σ⁻¹) into lower triangular form
    let k = gs_embed(g)?;
    let conjugated = conjugate_by(&sigma.inverse(), &k);
    Ok(f_map(&conjugated)
        .expect("conjugated Gram-Schmidt image of L(sigma^-1) lies in the big cell"))
}

/// Inverse of Φ(σ), mapping L(σ) back to L(σ⁻¹).
///
/// From `PkPᵀ = u·n̄` the conjugate `PkPᵀ` is `f⁻¹(n̄)`, and `g` is the
/// unit lower factor of `k = g·(an)⁻¹`. This is not Φ(σ⁻¹) in general.
pub fn phi_sigma_inverse(sigma: &Permutation, nbar: &SquareMatrix) -> Result<SquareMatrix> {
    if nbar.n() != sigma.n() {
        return Err(Error::DimensionMismatch {
            left: nbar.n(),
            right: sigma.n(),
        });
    }
    check_unit_lower(nbar)?;
    if let Some(((row, col), value)) = l_sigma_violation(nbar, sigma, UNIT_LOWER_TOL) {
        return Err(Error::NotInLSigma {
            sigma: sigma.inverse().to_string(),
            row: row + 1,
            col: col + 1,
            value,
        });
    }
    let k = conjugate_by(sigma, &f_inverse(nbar)?);
    unit_lower_factor(&k)
}

/// Unit lower factor `L` of `x = L·U` (Doolittle, no pivoting).
fn unit_lower_factor(x: &SquareMatrix) -> Result<SquareMatrix> {
    let n = x.n();
    let mut l = SquareMatrix::identity(n);
    let mut u = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..i).map(|t| l[(i, t)] * u[(t, j)]).sum();
            u[(i, j)] = x[(i, j)] - s;
        }
        if u[(i, i)].abs() < PIVOT_TOL {
            return Err(Error::OutsideCm { minor_index: i + 1 });
        }
        for r in i + 1..n {
            let s: f64 = (0..i).map(|t| l[(r, t)] * u[(t, i)]).sum();
            l[(r, i)] = (x[(r, i)] - s) / u[(i, i)];
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::weyl::l_sigma_membership;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Classical Gram-Schmidt on the columns.
    fn gram_schmidt(g: &SquareMatrix) -> SquareMatrix {
        let n = g.n();
        let mut q = SquareMatrix::zeros(n);
        for j in 0..n {
            let mut v: Vec<f64> = (0..n).map(|i| g[(i, j)]).collect();
            for k in 0..j {
                let dot: f64 = (0..n).map(|i| q[(i, k)] * g[(i, j)]).sum();
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi -= dot * q[(i, k)];
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for i in 0..n {
                q[(i, j)] = v[i] / norm;
            }
        }
        q
    }

    fn lower3(x: f64, y: f64, z: f64) -> SquareMatrix {
        SquareMatrix::from_rows(&[[1.0, 0.0, 0.0], [x, 1.0, 0.0], [y, z, 1.0]]).unwrap()
    }

    fn rotation(phi: f64) -> SquareMatrix {
        SquareMatrix::from_rows(&[[phi.cos(), -phi.sin()], [phi.sin(), phi.cos()]]).unwrap()
    }

    fn norms(x: f64, y: f64, z: f64) -> (f64, f64) {
        let n1 = (1.0 + x * x + y * y).sqrt();
        let n2 = ((x * z - y).powi(2) + z * z + 1.0).sqrt();
        (n1, n2)
    }

    #[test]
    fn kan_first_column_example() {
        let f = kan_factorize(&lower3(1.0, 0.0, 0.0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f.k[(0, 0)] - r).abs() < 1e-15);
        assert!((f.k[(1, 0)] - r).abs() < 1e-15);
        assert_eq!(f.k[(2, 0)].abs(), 0.0);
    }

    #[test]
    fn kan_of_rotation_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = sampling::special_orthogonal(4, &mut rng);
        let f = kan_factorize(&q).unwrap();
        assert!(f.k.dist(&q) < 1e-14);
        assert!(f.a.dist(&SquareMatrix::identity(4)) < 1e-14);
        assert!(f.n.dist(&SquareMatrix::identity(4)) < 1e-14);
    }

    #[test]
    fn kan_random_against_gram_schmidt() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..=8 {
            let g = sampling::unimodular_matrix(n, &mut rng);
            let f = kan_factorize(&g).unwrap();
            assert!(f.product().dist(&g) < 1e-10);
            assert!(f.k.orthogonality_residual() < 1e-12);
            assert!((f.k.det() - 1.0).abs() < 1e-10);
            let diag = f.a.diagonal();
            assert!(diag.iter().all(|&v| v > 0.0));
            assert!((diag.iter().product::<f64>() - 1.0).abs() < 1e-10);
            assert_eq!(f.a.off_diagonal_max_abs(), 0.0);
            assert_eq!(f.n.transpose().unit_lower_deviation(), 0.0);
            assert!(f.k.dist(&gram_schmidt(&g)) < 1e-9);
        }
    }

    #[test]
    fn kan_rejects_bad_determinant() {
        assert!(matches!(
            kan_factorize(&SquareMatrix::diag(&[2.0, 1.0])),
            Err(Error::NotUnimodular { .. })
        ));
        assert!(matches!(
            kan_factorize(&SquareMatrix::zeros(2)),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn unbar_of_identity() {
        let f = unbar_factorize(&SquareMatrix::identity(3)).unwrap();
        assert_eq!(f.u, SquareMatrix::identity(3));
        assert_eq!(f.nbar, SquareMatrix::identity(3));
        assert_eq!(f.m, SquareMatrix::identity(3));
    }

    #[test]
    fn unbar_of_rotation_by_elimination() {
        for &phi in &[0.3, -1.2, 1.5, 0.0] {
            let f = unbar_factorize(&rotation(phi)).unwrap();
            let (c, s) = (phi.cos(), phi.sin());
            let u = SquareMatrix::from_rows(&[[1.0 / c, -s], [0.0, c]]).unwrap();
            let nbar = SquareMatrix::from_rows(&[[1.0, 0.0], [s / c, 1.0]]).unwrap();
            assert!(f.u.dist(&u) < 1e-14);
            assert!(f.nbar.dist(&nbar) < 1e-14);
            assert_eq!(f.m, SquareMatrix::identity(2));
            assert!(f_map(&rotation(phi)).unwrap().dist(&nbar) < 1e-14);
        }
    }

    #[test]
    fn quarter_turn_is_outside() {
        let k = SquareMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            unbar_factorize(&k),
            Err(Error::OutsideCm { minor_index: 1 })
        ));
        assert_eq!(chevalley_test(&k).unwrap(), ChevalleyClass::Outside(1));
    }

    /// The four sign cases of a 2×2 rotation against direct elimination:
    /// `k = [[c, −s], [s, c]]` needs `m = I` iff `c > 0`.
    #[test]
    fn two_by_two_sign_cases() {
        for (phi, expected_in_c) in [(0.4, true), (-0.4, true), (2.8, false), (-2.8, false)] {
            let k = rotation(phi);
            let class = chevalley_test(&k).unwrap();
            if expected_in_c {
                assert_eq!(class, ChevalleyClass::InC);
            } else {
                assert_eq!(
                    class,
                    ChevalleyClass::InCMOnly(SquareMatrix::diag(&[-1.0, -1.0]))
                );
            }
            let f = unbar_factorize(&k).unwrap();
            assert!(f.product().dist(&k) < 1e-14);
        }
        let half_turn = SquareMatrix::diag(&[-1.0, -1.0]);
        assert_eq!(
            chevalley_test(&half_turn).unwrap(),
            ChevalleyClass::InCMOnly(SquareMatrix::diag(&[-1.0, -1.0]))
        );
    }

    #[test]
    fn unbar_random_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=8 {
            for _ in 0..10 {
                let k = sampling::special_orthogonal(n, &mut rng);
                let f = unbar_factorize(&k).unwrap();
                assert!(f.product().dist(&k) < 1e-10);
                assert_eq!(f.u.lower_max_abs(), 0.0);
                assert!(f.u.diagonal().iter().all(|&v| v > 0.0));
                assert_eq!(f.nbar.unit_lower_deviation(), 0.0);
                assert_eq!(f.m.off_diagonal_max_abs(), 0.0);
                assert_eq!(&f.m * &f.m, SquareMatrix::identity(n));
                // the class does not change under inversion
                assert_eq!(
                    std::mem::discriminant(&chevalley_test(&k).unwrap()),
                    std::mem::discriminant(&chevalley_test(&k.transpose()).unwrap())
                );
            }
        }
    }

    #[test]
    fn unbar_rejects_non_orthogonal() {
        let g = SquareMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            unbar_factorize(&g),
            Err(Error::NotSpecialOrthogonal { .. })
        ));
        let reflection = SquareMatrix::diag(&[1.0, -1.0]);
        assert!(matches!(
            unbar_factorize(&reflection),
            Err(Error::NotSpecialOrthogonal { .. })
        ));
    }

    #[test]
    fn f_inverse_example() {
        for &a in &[0.5, -2.0, 7.0] {
            let nbar = SquareMatrix::from_rows(&[[1.0, 0.0], [a, 1.0]]).unwrap();
            let expected = SquareMatrix::from_rows(&[[1.0, -a], [a, 1.0]])
                .unwrap()
                .scale(1.0 / (1.0 + a * a).sqrt());
            assert!(f_inverse(&nbar).unwrap().dist(&expected) < 1e-15);
        }
        assert!(
            f_inverse(&SquareMatrix::identity(3))
                .unwrap()
                .dist(&SquareMatrix::identity(3))
                < 1e-15
        );
    }

    #[test]
    fn f_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=6 {
            for _ in 0..10 {
                let nbar = sampling::unit_lower(n, &mut rng);
                let k = f_inverse(&nbar).unwrap();
                assert_eq!(chevalley_test(&k).unwrap(), ChevalleyClass::InC);
                assert!(f_map(&k).unwrap().dist(&nbar) < 1e-10);
                assert!(f_inverse(&f_map(&k).unwrap()).unwrap().dist(&k) < 1e-10);
            }
        }
    }

    #[test]
    fn f_is_injective_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ks: Vec<_> = (0..20)
            .map(|_| f_inverse(&sampling::unit_lower(3, &mut rng)).unwrap())
            .collect();
        for a in 0..ks.len() {
            for b in a + 1..ks.len() {
                assert!(f_map(&ks[a]).unwrap().dist(&f_map(&ks[b]).unwrap()) > 1e-6);
            }
        }
    }

    #[test]
    fn f_map_rejects_cm_points() {
        let k = rotation(2.8);
        assert!(matches!(f_map(&k), Err(Error::OutsideBigCell { .. })));
    }

    #[test]
    fn gs_embed_example_and_structure() {
        let k = gs_embed(&lower3(1.0, 1.0, 1.0)).unwrap();
        let r3 = 3f64.sqrt();
        for i in 0..3 {
            assert!((k[(i, 0)] - 1.0 / r3).abs() < 1e-15);
        }
        // third column is the normalized cross product of the first two columns
        let (_, n2) = norms(1.0, 1.0, 1.0);
        assert!((n2 - 2f64.sqrt()).abs() < 1e-15);
        let cross = [0.0, -1.0, 1.0];
        for i in 0..3 {
            assert!((k[(i, 2)] - cross[i] / n2).abs() < 1e-15);
        }
        assert_eq!(
            gs_embed(&SquareMatrix::identity(4)).unwrap(),
            SquareMatrix::identity(4)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = sampling::unit_lower(4, &mut rng);
        let k = gs_embed(&g).unwrap();
        assert!(k.orthogonality_residual() < 1e-12);
        assert!((k.det() - 1.0).abs() < 1e-12);
        let change = &k.transpose() * &g;
        assert!(change.lower_max_abs() < 1e-12);
        assert!(change.diagonal().iter().all(|&v| v > 0.0));
        assert!(k.dist(&gram_schmidt(&g)) < 1e-12);
    }

    #[test]
    fn embedding_entry_three_two() {
        // the (3,2) entry of the embedding is (z + z x² − x y)/(n₁ n₂)
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (x, y, z) = (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let (n1, n2) = norms(x, y, z);
            let k = gs_embed(&lower3(x, y, z)).unwrap();
            assert!((k[(2, 1)] - (z + z * x * x - x * y) / (n1 * n2)).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (x, y, z) = (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let (n1, n2) = norms(x, y, z);
            let p = phi(&lower3(x, y, z)).unwrap();
            assert_eq!(p.unit_lower_deviation(), 0.0);
            assert!((p[(1, 0)] - (x + y * z) / n2).abs() < 1e-12);
            assert!((p[(2, 0)] - n2 * y / n1).abs() < 1e-12);
            assert!((p[(2, 1)] - (z + z * x * x - y * x) / n1).abs() < 1e-12);
        }
        assert!(
            phi(&SquareMatrix::identity(3))
                .unwrap()
                .dist(&SquareMatrix::identity(3))
                < 1e-15
        );
    }

    #[test]
    fn phi_sigma_on_transposition() {
        let s = Permutation::parse("2 1 3").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let (y, z) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let g = lower3(0.0, y, z);
            let (n1, n2) = norms(0.0, y, z);
            let out = phi_sigma(&s, &g).unwrap();
            // oracle: the last row of n̄ is the last row of σkσ⁻¹ over its corner entry
            let c = conjugate_by(&s.inverse(), &gs_embed(&g).unwrap());
            assert!((out[(2, 0)] - c[(2, 0)] / c[(2, 2)]).abs() < 1e-12);
            assert!((out[(2, 1)] - c[(2, 1)] / c[(2, 2)]).abs() < 1e-12);
            assert!(out[(1, 0)].abs() < 1e-12);
            assert!((out[(2, 0)] - z / n1).abs() < 1e-12);
            assert!((out[(2, 1)] - n2 * y / n1).abs() < 1e-12);
        }
        let err = phi_sigma(&s, &lower3(0.5, 1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NotInLSigma { row: 2, col: 1, .. }));
    }

    #[test]
    fn phi_is_not_an_involution() {
        let g = lower3(1.0, 1.0, 0.0);
        let twice = phi(&phi(&g).unwrap()).unwrap();
        assert!(twice.dist(&g) > 0.1);
        let back = phi_sigma_inverse(&Permutation::identity(3), &phi(&g).unwrap()).unwrap();
        assert!(back.dist(&g) < 1e-12);
    }

    #[test]
    fn phi_sigma_identity_is_phi() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = sampling::unit_lower(4, &mut rng);
        let e = Permutation::identity(4);
        assert!(phi_sigma(&e, &g).unwrap().dist(&phi(&g).unwrap()) < 1e-15);
    }

    #[test]
    fn phi_sigma_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3, 4] {
            for s in Permutation::all(n) {
                let inv = s.inverse();
                let g = sampling::l_sigma_element(&inv, &mut rng);
                let out = phi_sigma(&s, &g).unwrap();
                assert!(l_sigma_membership(&out, &s, 1e-10).unwrap(), "{s}");
                let back = phi_sigma_inverse(&s, &out).unwrap();
                assert!(back.dist(&g) < 1e-9, "{s}: {}", back.dist(&g));
                assert!(l_sigma_membership(&back, &inv, 1e-10).unwrap());
                // PkPᵀ = u·Φ(σ)(g) with u upper triangular, positive diagonal
                let c = conjugate_by(&inv, &gs_embed(&g).unwrap());
                let u = &c * &out.unit_lower_inverse();
                assert!(u.lower_max_abs() < 1e-10);
                assert!(u.diagonal().iter().all(|&v| v > 0.0));
            }
        }
    }
}
