//! Random test inputs. Every function takes the generator explicitly; the
//! tools seed a `ChaCha8Rng` with `seed_from_u64` so runs are reproducible
//! across platforms.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Spectrum, SquareMatrix};
use crate::weyl::{strictly_lower_pairs, Permutation, Profile};

pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SquareMatrix {
    SquareMatrix::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn traceless_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SquareMatrix {
    let mut x = gaussian_matrix(n, rng);
    let shift = x.trace() / n as f64;
    for i in 0..n {
        x[(i, i)] -= shift;
    }
    x
}

pub fn traceless_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SquareMatrix {
    traceless_gaussian(n, rng).symmetrize()
}

/// Gaussian matrix rescaled to determinant one.
pub fn unimodular_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SquareMatrix {
    loop {
        let mut g = gaussian_matrix(n, rng);
        let mut det = g.det();
        if det.abs() < 1e-3 {
            continue;
        }
        if det < 0.0 {
            for j in 0..n {
                g[(0, j)] = -g[(0, j)];
            }
            det = -det;
        }
        return g.scale(det.powf(-1.0 / n as f64));
    }
}

/// Haar-distributed special orthogonal matrix (modified Gram-Schmidt on a
/// Gaussian matrix, then a column sign fix for det +1).
pub fn special_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SquareMatrix {
    let g = gaussian_matrix(n, rng);
    let mut q = g.clone();
    for j in 0..n {
        for k in 0..j {
            let dot: f64 = (0..n).map(|i| q[(i, k)] * q[(i, j)]).sum();
            for i in 0..n {
                q[(i, j)] -= dot * q[(i, k)];
            }
        }
        let norm: f64 = (0..n).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    if q.det() < 0.0 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

pub fn unit_lower<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SquareMatrix {
    SquareMatrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => rng.sample(StandardNormal),
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Less => 0.0,
    })
}

/// Random element of L(σ): Gaussian entries on the pairs with σ(i) > σ(j).
pub fn l_sigma_element<R: Rng + ?Sized>(sigma: &Permutation, rng: &mut R) -> SquareMatrix {
    let n = sigma.n();
    let mut g = SquareMatrix::identity(n);
    for (i, j) in strictly_lower_pairs(n) {
        if sigma.apply(i) > sigma.apply(j) {
            g[(i, j)] = rng.sample(StandardNormal);
        }
    }
    g
}

/// Strictly lower matrix with entries uniform in `[-scale, scale]`.
pub fn strictly_lower_uniform<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> SquareMatrix {
    SquareMatrix::from_fn(n, |i, j| {
        if i > j {
            rng.gen_range(-scale..=scale)
        } else {
            0.0
        }
    })
}

/// Strictly upper matrix with entries uniform in `[-scale, scale]`.
pub fn strictly_upper_uniform<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> SquareMatrix {
    SquareMatrix::from_fn(n, |i, j| {
        if i < j {
            rng.gen_range(-scale..=scale)
        } else {
            0.0
        }
    })
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    Permutation::new(images).expect("shuffle of 0..n")
}

/// Decreasing traceless values with consecutive gaps in `[0.5, 2]`.
pub fn random_spectrum<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Spectrum {
    let mut values = vec![0.0; n];
    for i in 1..n {
        values[i] = values[i - 1] - rng.gen_range(0.5..=2.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    for v in &mut values {
        *v -= mean;
    }
    // the mean shift can leave a residual sum of a few ulps
    let residual: f64 = values.iter().sum();
    values[n / 2] -= residual;
    Spectrum::new(values).expect("gaps bounded away from zero")
}

/// `Q·diag(h)·Qᵀ` for a Haar-random rotation `Q`, symmetrized.
pub fn symmetric_with_spectrum<R: Rng + ?Sized>(h: &Spectrum, rng: &mut R) -> SquareMatrix {
    let q = special_orthogonal(h.n(), rng);
    (&(&q * &h.to_diag()) * &q.transpose()).symmetrize()
}

/// Closure of one or two random strictly lower pairs.
pub fn random_profile<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Profile {
    let lower = strictly_lower_pairs(n);
    let count = rng.gen_range(1..=2);
    let seeds: Vec<_> = (0..count).map(|_| *lower.choose(rng).unwrap()).collect();
    Profile::closure_of(n, &seeds).expect("seeds are strictly lower")
}
