use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    fiber_experiment, pushforward_check, pushforward_richardson, sl2_frame_check,
    sym_linearization_spectrum, unstable_manifold_experiment, CheckReport, FD_STEP,
};
use crate::atlas::{chart_forward, chart_inverse, h_conjugate, ChartCoords};
use crate::error::{Error, Result};
use crate::factorizations::{
    f_inverse, f_map, kan_factorize, phi_sigma, phi_sigma_inverse, unbar_factorize,
};
use crate::flows::{integrate, limit_point, Field, IntegratorConfig};
use crate::linalg::{MAX_DIM, MIN_DIM};
use crate::sampling;
use crate::weyl::{l_sigma_membership, Permutation};

/// Groups of checks run by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Factor,
    Atlas,
    Toda,
    Sym,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factor" => Ok(Suite::Factor),
            "atlas" => Ok(Suite::Atlas),
            "toda" => Ok(Suite::Toda),
            "sym" => Ok(Suite::Sym),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidConfig(format!(
                "unknown suite {other:?} (expected factor, atlas, toda, sym or all)"
            ))),
        }
    }
}

const SAMPLES: usize = 10;

/// Runs a suite at dimension `n`. Every random choice comes from a
/// ChaCha8 generator seeded with `seed`, so reports are reproducible.
pub fn verify_suite(suite: Suite, n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    if !(MIN_DIM..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    if matches!(suite, Suite::Factor | Suite::All) {
        factor_checks(n, &mut rng, &mut out)?;
    }
    if matches!(suite, Suite::Atlas | Suite::All) {
        atlas_checks(n, &mut rng, &mut out)?;
    }
    if matches!(suite, Suite::Toda | Suite::All) {
        toda_checks(n, &mut rng, &mut out)?;
    }
    if matches!(suite, Suite::Sym | Suite::All) {
        sym_checks(n, &mut rng, &mut out)?;
    }
    Ok(out)
}

/// Up to `limit` permutations: all of them when there are few, otherwise
/// identity, longest and random ones.
fn some_permutations(n: usize, limit: usize, rng: &mut ChaCha8Rng) -> Vec<Permutation> {
    if n <= 3 {
        return Permutation::all(n);
    }
    let mut ws = vec![Permutation::identity(n), Permutation::longest(n)];
    while ws.len() < limit {
        ws.push(sampling::random_permutation(n, rng));
    }
    ws
}

fn factor_checks(n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<CheckReport>) -> Result<()> {
    let mut kan = Vec::new();
    for _ in 0..SAMPLES {
        let g = sampling::unimodular_matrix(n, rng);
        let f = kan_factorize(&g)?;
        kan.push(f.product().dist(&g) / g.norm());
    }
    out.push(CheckReport::from_samples(
        "factor.kan_reconstruction",
        &kan,
        1e-12,
        json!({ "n": n }),
    ));

    let mut unbar = Vec::new();
    let mut f_round = Vec::new();
    for _ in 0..SAMPLES {
        let k = sampling::special_orthogonal(n, rng);
        let f = unbar_factorize(&k)?;
        unbar.push(f.product().dist(&k));
        let nbar = sampling::unit_lower(n, rng);
        f_round.push(f_map(&f_inverse(&nbar)?)?.dist(&nbar) / nbar.norm());
    }
    out.push(CheckReport::from_samples(
        "factor.unbar_reconstruction",
        &unbar,
        1e-11,
        json!({ "n": n }),
    ));
    out.push(CheckReport::from_samples(
        "factor.f_round_trip",
        &f_round,
        1e-10,
        json!({ "n": n }),
    ));

    let mut phi_round = Vec::new();
    let mut membership = Vec::new();
    for sigma in some_permutations(n, 6, rng) {
        let g = sampling::l_sigma_element(&sigma.inverse(), rng);
        let image = phi_sigma(&sigma, &g)?;
        membership.push(if l_sigma_membership(&image, &sigma, 1e-10)? {
            0.0
        } else {
            1.0
        });
        phi_round.push(phi_sigma_inverse(&sigma, &image)?.dist(&g) / g.norm());
    }
    out.push(CheckReport::from_samples(
        "factor.phi_sigma_round_trip",
        &phi_round,
        1e-9,
        json!({ "n": n }),
    ));
    out.push(CheckReport::from_samples(
        "factor.phi_sigma_image_in_l_sigma",
        &membership,
        0.5,
        json!({ "n": n }),
    ));
    Ok(())
}

fn atlas_checks(n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<CheckReport>) -> Result<()> {
    let h = sampling::random_spectrum(n, rng);
    let mut coords_round = Vec::new();
    let mut point_round = Vec::new();
    for w in some_permutations(n, 6, rng) {
        let lower = sampling::strictly_lower_uniform(n, 1.0, rng);
        let c = ChartCoords::new(w.clone(), lower, h.clone())?;
        let y = chart_inverse(&c)?;
        coords_round.push(chart_forward(&y, &w)?.lower().dist(c.lower()));
        let back = chart_inverse(&chart_forward(&y, &w)?)?;
        point_round.push(back.y().dist(y.y()));
    }
    let details = json!({ "n": n, "h": h.values() });
    out.push(CheckReport::from_samples(
        "atlas.coords_round_trip",
        &coords_round,
        1e-9,
        details.clone(),
    ));
    out.push(CheckReport::from_samples(
        "atlas.point_round_trip",
        &point_round,
        1e-9,
        details,
    ));
    Ok(())
}

fn toda_checks(n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<CheckReport>) -> Result<()> {
    let h = sampling::random_spectrum(n, rng);
    let mut residuals = Vec::new();
    for _ in 0..SAMPLES {
        let w = sampling::random_permutation(n, rng);
        let lower = sampling::strictly_lower_uniform(n, 1.0, rng);
        let y = chart_inverse(&ChartCoords::new(w.clone(), lower, h.clone())?)?;
        residuals.push(pushforward_check(&y, &w, FD_STEP)?.max_residual);
    }
    out.push(CheckReport::from_samples(
        "toda.pushforward",
        &residuals,
        super::PUSHFORWARD_TOL,
        json!({ "n": n, "h": h.values(), "fd_step": FD_STEP }),
    ));

    let w = sampling::random_permutation(n, rng);
    let lower = sampling::strictly_lower_uniform(n, 0.5, rng);
    let y = chart_inverse(&ChartCoords::new(w.clone(), lower, h.clone())?)?;
    let mut r = pushforward_richardson(&y, &w, 1e-2)?;
    r.name = "toda.pushforward_richardson".into();
    out.push(r);

    let cfg = IntegratorConfig::with_t_max(60.0);
    for w in some_permutations(n, 4, rng) {
        let mut r = unstable_manifold_experiment(&w, &h, 1e-4, &cfg)?;
        r.name = format!("toda.unstable_manifold[{w}]");
        out.push(r);
    }

    let mut sorting = Vec::new();
    let cfg = IntegratorConfig::with_t_max(400.0);
    let target = h.to_diag();
    for _ in 0..SAMPLES {
        let y0 = sampling::symmetric_with_spectrum(&h, rng);
        sorting.push(limit_point(Field::Toda, &y0, &cfg)?.dist(&target));
    }
    out.push(CheckReport::from_samples(
        "toda.sorting_limit",
        &sorting,
        1e-7,
        json!({ "n": n, "h": h.values() }),
    ));
    Ok(())
}

fn sym_checks(n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<CheckReport>) -> Result<()> {
    // the Jacobian lives on n(n−1) directions, which caps n at 4
    let h_small = sampling::random_spectrum(n.min(4), rng);
    let mut r = sym_linearization_spectrum(&h_small)?;
    r.name = "sym.linearization_spectrum".into();
    out.push(r);

    let h = sampling::random_spectrum(n, rng);
    let cfg = IntegratorConfig::with_t_max(400.0);
    let perturbations: Vec<_> = (0..5)
        .map(|_| sampling::strictly_upper_uniform(n, 1.0, rng))
        .collect();
    for w in [
        Permutation::identity(n),
        sampling::random_permutation(n, rng),
    ] {
        let mut r = fiber_experiment(&w, &h, &cfg, &perturbations)?;
        r.name = format!("sym.fiber[{w}]");
        out.push(r);
    }

    let mut drift = Vec::new();
    let mut norm_growth = Vec::new();
    for _ in 0..5 {
        let x0 = sampling::traceless_gaussian(n, rng);
        let traj = integrate(Field::Sym, &x0, &IntegratorConfig::with_t_max(20.0))?;
        drift.push(traj.isospectral_drift());
        let norms: Vec<f64> = traj.states.iter().map(|s| s.norm().powi(2)).collect();
        norm_growth.push(norms.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max));
    }
    out.push(CheckReport::from_samples(
        "sym.isospectral_drift",
        &drift,
        1e-8,
        json!({ "n": n }),
    ));
    out.push(CheckReport::from_samples(
        "sym.norm_square_growth",
        &norm_growth,
        1e-10,
        json!({ "n": n }),
    ));

    out.push(sl2_frame_check());

    let hw = h_conjugate(&h, &Permutation::identity(n));
    let stationary = integrate(Field::Sym, &hw, &cfg)?;
    out.push(CheckReport::new(
        "sym.diagonal_stationary",
        stationary.last().dist(&hw),
        1e-15,
        1,
        json!({ "n": n }),
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("toda".parse::<Suite>().unwrap(), Suite::Toda);
        assert!("everything".parse::<Suite>().is_err());
        assert_eq!(serde_json::to_string(&Suite::All).unwrap(), "\"all\"");
    }

    #[test]
    fn all_suites_pass_at_n3() {
        let reports = verify_suite(Suite::All, 3, 7).unwrap();
        for r in &reports {
            assert!(r.passed, "{}", serde_json::to_string_pretty(r).unwrap());
        }
        let again = verify_suite(Suite::All, 3, 7).unwrap();
        assert_eq!(reports, again);
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(matches!(
            verify_suite(Suite::Factor, 1, 0),
            Err(Error::UnsupportedDimension(1))
        ));
    }
}
