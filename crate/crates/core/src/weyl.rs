//! Permutations as Weyl group elements, their inversion sets, the subgroups
//! L(σ) of unit lower triangular matrices, and Hessenberg-type profiles.
//!
//! Indices are 0-based in the API. Parsing, display and JSON use the usual
//! 1-based one-line notation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SquareMatrix, MAX_DIM, MIN_DIM};

/// A strictly lower index pair `(row, col)`, 0-based.
pub type Pair = (usize, usize);

/// Permutation of `0..n`; `images[j]` is σ(j).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// From 0-based images.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(format!(
                    "images must be the numbers 1..{n} each exactly once"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    /// From 1-based one-line notation σ(1), …, σ(n).
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        if images.iter().any(|&v| v == 0) {
            return Err(Error::InvalidPermutation(
                "one-line notation is 1-based".into(),
            ));
        }
        Permutation::new(images.iter().map(|v| v - 1).collect())
    }

    /// Parses `"2 1 3"` (commas and parentheses are also accepted).
    pub fn parse(text: &str) -> Result<Self> {
        let cleaned: String = text
            .chars()
            .map(|c| {
                if c == ',' || c == '(' || c == ')' {
                    ' '
                } else {
                    c
                }
            })
            .collect();
        let images = cleaned
            .split_whitespace()
            .map(|s| {
                s.parse::<usize>().map_err(|_| {
                    Error::InvalidPermutation(format!("cannot parse {s:?} as an index"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_one_line(&images)
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// The order-reversing element w₀.
    pub fn longest(n: usize) -> Self {
        Permutation {
            images: (0..n).rev().collect(),
        }
    }

    /// Every permutation of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation {
                images: current.clone(),
            });
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1))
                .rev()
                .find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        out
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// σ(i).
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|v| v + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (j, &v) in self.images.iter().enumerate() {
            inv[v] = j;
        }
        Permutation { images: inv }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation {
            images: other.images.iter().map(|&v| self.images[v]).collect(),
        }
    }

    /// Number of inversions, the length of σ.
    pub fn length(&self) -> usize {
        let n = self.n();
        let mut count = 0;
        for a in 0..n {
            for b in a + 1..n {
                if self.images[a] > self.images[b] {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::from_one_line(&images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.one_line()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_line().iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{self}")
    }
}

/// 0/1 matrix with entry (σ(j), j) = 1, so that `P·X·Pᵀ` moves entry
/// (i, j) to (σ(i), σ(j)).
pub fn perm_matrix(sigma: &Permutation) -> SquareMatrix {
    let mut p = SquareMatrix::zeros(sigma.n());
    for j in 0..sigma.n() {
        p[(sigma.apply(j), j)] = 1.0;
    }
    p
}

/// `P·X·Pᵀ`, computed by moving entries rather than multiplying.
pub fn conjugate_by(sigma: &Permutation, x: &SquareMatrix) -> SquareMatrix {
    let inv = sigma.inverse();
    SquareMatrix::from_fn(x.n(), |i, j| x[(inv.apply(i), inv.apply(j))])
}

/// Strictly lower pairs split by the direction of the chart dynamics.
///
/// `unstable` holds the pairs whose chart coordinate grows under the
/// linearized Toda flow (the Bruhat cell directions); `stable` the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InversionSets {
    pub stable: BTreeSet<Pair>,
    pub unstable: BTreeSet<Pair>,
}

impl InversionSets {
    /// Pairs as 1-based lists, for display and JSON output.
    pub fn one_based(set: &BTreeSet<Pair>) -> Vec<[usize; 2]> {
        set.iter().map(|&(i, j)| [i + 1, j + 1]).collect()
    }
}

pub fn strictly_lower_pairs(n: usize) -> Vec<Pair> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in 0..i {
            out.push((i, j));
        }
    }
    out
}

/// unstable = {(i,j) : i > j, σ⁻¹(i) < σ⁻¹(j)}, stable = the other lower pairs.
pub fn inversion_sets(sigma: &Permutation) -> InversionSets {
    let inv = sigma.inverse();
    let mut sets = InversionSets {
        stable: BTreeSet::new(),
        unstable: BTreeSet::new(),
    };
    for (i, j) in strictly_lower_pairs(sigma.n()) {
        if inv.apply(i) < inv.apply(j) {
            sets.unstable.insert((i, j));
        } else {
            sets.stable.insert((i, j));
        }
    }
    sets
}

/// Whether `g` lies in L(σ): `supp(g − I) ⊆ {(i,j) : i > j, σ(i) > σ(j)}`,
/// equivalently `σ g σ⁻¹` stays lower triangular.
pub fn l_sigma_membership(g: &SquareMatrix, sigma: &Permutation, tol: f64) -> Result<bool> {
    if g.n() != sigma.n() {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: sigma.n(),
        });
    }
    let deviation = g.unit_lower_deviation();
    if deviation > tol.max(1e-12) {
        return Err(Error::NotUnitLowerTriangular { deviation });
    }
    Ok(l_sigma_violation(g, sigma, tol).is_none())
}

/// First entry of `g` outside the support allowed by L(σ), if any.
pub(crate) fn l_sigma_violation(
    g: &SquareMatrix,
    sigma: &Permutation,
    tol: f64,
) -> Option<(Pair, f64)> {
    strictly_lower_pairs(g.n())
        .into_iter()
        .find(|&(i, j)| sigma.apply(i) < sigma.apply(j) && g[(i, j)].abs() > tol)
        .map(|(i, j)| ((i, j), g[(i, j)]))
}

/// A set of strictly lower pairs closed towards the diagonal: with (i, j)
/// it contains every (ĩ, j̃) with i ≥ ĩ > j̃ ≥ j.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileLiteral", into = "ProfileLiteral")]
pub struct Profile {
    n: usize,
    pairs: BTreeSet<Pair>,
}

/// JSON shape `{"n": int, "pairs": [[i, j], ...]}`, 1-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileLiteral {
    pub n: usize,
    pub pairs: Vec<[usize; 2]>,
}

impl TryFrom<ProfileLiteral> for Profile {
    type Error = Error;
    fn try_from(lit: ProfileLiteral) -> Result<Self> {
        let mut pairs = Vec::with_capacity(lit.pairs.len());
        for [i, j] in lit.pairs {
            if i == 0 || j == 0 || i > lit.n || j > lit.n {
                return Err(Error::ProfileOutOfRange { i, j, n: lit.n });
            }
            pairs.push((i - 1, j - 1));
        }
        profile_validate(lit.n, pairs)
    }
}

impl From<Profile> for ProfileLiteral {
    fn from(p: Profile) -> Self {
        ProfileLiteral {
            n: p.n,
            pairs: p.pairs.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        }
    }
}

impl Profile {
    pub fn empty(n: usize) -> Self {
        Profile {
            n,
            pairs: BTreeSet::new(),
        }
    }

    /// {(2,1), (3,2), …, (n,n−1)} in 1-based terms.
    pub fn hessenberg(n: usize) -> Self {
        Profile {
            n,
            pairs: (1..n).map(|i| (i, i - 1)).collect(),
        }
    }

    pub fn full(n: usize) -> Self {
        Profile {
            n,
            pairs: strictly_lower_pairs(n).into_iter().collect(),
        }
    }

    /// Smallest profile containing the given strictly lower pairs.
    pub fn closure_of(n: usize, seeds: &[Pair]) -> Result<Self> {
        let mut pairs = BTreeSet::new();
        for &(i, j) in seeds {
            if i >= n || j >= n {
                return Err(Error::ProfileOutOfRange {
                    i: i + 1,
                    j: j + 1,
                    n,
                });
            }
            if i <= j {
                return Err(Error::ProfileAxiomA { i: i + 1, j: j + 1 });
            }
            for a in j + 1..=i {
                for b in j..a {
                    pairs.insert((a, b));
                }
            }
        }
        Ok(Profile { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &BTreeSet<Pair> {
        &self.pairs
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.pairs.contains(&pair)
    }
}

/// Checks both profile axioms and returns the profile, or the violated
/// axiom with a witness (1-based in the error).
pub fn profile_validate(n: usize, pairs: impl IntoIterator<Item = Pair>) -> Result<Profile> {
    let mut set = BTreeSet::new();
    for (i, j) in pairs {
        if i >= n || j >= n {
            return Err(Error::ProfileOutOfRange {
                i: i + 1,
                j: j + 1,
                n,
            });
        }
        if i <= j {
            return Err(Error::ProfileAxiomA { i: i + 1, j: j + 1 });
        }
        set.insert((i, j));
    }
    // closure under the two elementary moves implies closure under the order
    for &(i, j) in &set {
        for m in [(i - 1, j), (i, j + 1)] {
            if m.0 > m.1 && !set.contains(&m) {
                return Err(Error::ProfileAxiomB {
                    i: i + 1,
                    j: j + 1,
                    mi: m.0 + 1,
                    mj: m.1 + 1,
                });
            }
        }
    }
    Ok(Profile { n, pairs: set })
}

/// Whether every strictly lower entry of `x` outside `p` is at most `tol`.
pub fn v_p_membership(x: &SquareMatrix, p: &Profile, tol: f64) -> bool {
    v_p_violation(x, p) <= tol
}

/// Largest strictly lower entry of `x` outside `p`.
pub fn v_p_violation(x: &SquareMatrix, p: &Profile) -> f64 {
    strictly_lower_pairs(x.n())
        .into_iter()
        .filter(|pair| !p.contains(*pair))
        .map(|(i, j)| x[(i, j)].abs())
        .fold(0.0, f64::max)
}

/// Zeros every strictly lower entry outside `p`.
pub fn profile_project(x: &SquareMatrix, p: &Profile) -> SquareMatrix {
    SquareMatrix::from_fn(x.n(), |i, j| {
        if i > j && !p.contains((i, j)) {
            0.0
        } else {
            x[(i, j)]
        }
    })
}
