use serde_json::{json, Value};

use super::{worst_ratio, CheckReport};
use crate::atlas::{chart_inverse, h_conjugate, ChartCoords};
use crate::error::Result;
use crate::flows::{toda_field, IntegratorConfig};
use crate::linalg::{Spectrum, SquareMatrix};
use crate::weyl::{inversion_sets, Pair, Permutation};

/// A run has converged to `H^w` when it is this close in Frobenius norm...
pub const CONVERGENCE_DISTANCE: f64 = 1e-7;
/// ...and the field norm is below this.
pub const CONVERGENCE_FIELD: f64 = 1e-10;
/// A run has escaped once its distance to `H^w` exceeds this many `eps`.
pub const ESCAPE_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Outcome {
    Converged,
    Escaped,
    Undecided,
}

impl Outcome {
    fn name(self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::Escaped => "escaped",
            Outcome::Undecided => "undecided",
        }
    }
}

struct Run {
    outcome: Outcome,
    time: f64,
    distance: f64,
    field_norm: f64,
}

impl Run {
    /// Ratio that is below 1 exactly when the run ended as `want`.
    fn ratio(&self, want: Outcome, escape: f64) -> f64 {
        match want {
            Outcome::Converged => worst_ratio(&[
                (self.distance, CONVERGENCE_DISTANCE),
                (self.field_norm, CONVERGENCE_FIELD),
            ]),
            _ => {
                if self.distance > 0.0 {
                    escape / self.distance
                } else {
                    f64::MAX
                }
            }
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "outcome": self.outcome.name(),
            "time": self.time,
            "distance": self.distance,
            "field_norm": self.field_norm,
        })
    }
}

/// Integrates the Toda field (negated when `backward`) from `x0` until it
/// converges to `hw`, leaves the `escape` ball around it, or hits `t_max`.
fn run(
    x0: &SquareMatrix,
    hw: &SquareMatrix,
    backward: bool,
    escape: f64,
    cfg: &IntegratorConfig,
) -> Result<Run> {
    let sign = if backward { -1.0 } else { 1.0 };
    let run_cfg = IntegratorConfig {
        stop_field_norm: cfg.stop_field_norm.min(CONVERGENCE_FIELD),
        ..cfg.clone()
    };
    let traj = crate::flows::integrate_with(
        |x| toda_field(x).scale(sign),
        x0,
        &run_cfg,
        |_, x| x.dist(hw) > escape,
    )?;
    let distance = traj.last().dist(hw);
    let field_norm = traj.final_field_norm;
    let outcome = if distance > escape {
        Outcome::Escaped
    } else if distance < CONVERGENCE_DISTANCE && field_norm < CONVERGENCE_FIELD {
        Outcome::Converged
    } else {
        Outcome::Undecided
    };
    Ok(Run {
        outcome,
        time: traj.final_time(),
        distance,
        field_norm,
    })
}

fn one_based(p: Pair) -> [usize; 2] {
    [p.0 + 1, p.1 + 1]
}

/// Perturbs `H^w` by `±eps` along each chart coordinate and classifies the
/// coordinate empirically: stable when the forward Toda flow returns to
/// `H^w` and the backward flow escapes, unstable when the roles swap.
/// The classification must match the inversion sets of `w`; a combined
/// perturbation along all unstable coordinates must escape forward.
pub fn unstable_manifold_experiment(
    w: &Permutation,
    h: &Spectrum,
    eps: f64,
    cfg: &IntegratorConfig,
) -> Result<CheckReport> {
    cfg.validate()?;
    let n = w.n();
    let hw = h_conjugate(h, w);
    let sets = inversion_sets(w);
    let escape = ESCAPE_FACTOR * eps;
    let mut ratios = Vec::new();
    let mut pairs_json = Vec::new();
    let mut mismatches = 0usize;

    for (i, j) in crate::weyl::strictly_lower_pairs(n) {
        let expect_unstable = sets.unstable.contains(&(i, j));
        for sign in [1.0, -1.0] {
            let c = ChartCoords::single(w.clone(), h.clone(), (i, j), sign * eps)?;
            let x0 = chart_inverse(&c)?.y().clone();
            let forward = run(&x0, &hw, false, escape, cfg)?;
            let backward = run(&x0, &hw, true, escape, cfg)?;
            let observed = match (forward.outcome, backward.outcome) {
                (Outcome::Converged, Outcome::Escaped) => "stable",
                (Outcome::Escaped, Outcome::Converged) => "unstable",
                _ => "unclassified",
            };
            let expected = if expect_unstable {
                "unstable"
            } else {
                "stable"
            };
            if observed != expected {
                mismatches += 1;
            }
            let (conv, esc) = if expect_unstable {
                (&backward, &forward)
            } else {
                (&forward, &backward)
            };
            ratios.push(conv.ratio(Outcome::Converged, escape));
            ratios.push(esc.ratio(Outcome::Escaped, escape));
            pairs_json.push(json!({
                "pair": one_based((i, j)),
                "sign": sign,
                "expected": expected,
                "observed": observed,
                "forward": forward.to_json(),
                "backward": backward.to_json(),
            }));
        }
    }

    let mut generic = Value::Null;
    if !sets.unstable.is_empty() {
        let mut lower = SquareMatrix::zeros(n);
        for &(i, j) in &sets.unstable {
            lower[(i, j)] = eps;
        }
        let x0 = chart_inverse(&ChartCoords::new(w.clone(), lower, h.clone())?)?
            .y()
            .clone();
        let forward = run(&x0, &hw, false, escape, cfg)?;
        ratios.push(forward.ratio(Outcome::Escaped, escape));
        generic = forward.to_json();
    }

    let dimension_ok = sets.stable.len() + sets.unstable.len() == n * (n - 1) / 2;
    if !dimension_ok {
        ratios.push(f64::MAX);
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let details = json!({
        "w": w.to_string(),
        "h": h.values(),
        "eps": eps,
        "stable": sets.stable.iter().map(|&p| one_based(p)).collect::<Vec<_>>(),
        "unstable": sets.unstable.iter().map(|&p| one_based(p)).collect::<Vec<_>>(),
        "dimension_ok": dimension_ok,
        "mismatches": mismatches,
        "pairs": pairs_json,
        "generic_forward": generic,
    });
    Ok(CheckReport::new(
        "unstable_manifold",
        worst,
        1.0,
        ratios.len(),
        details,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::with_t_max(60.0)
    }

    #[test]
    fn attractor_and_repeller() {
        let h = Spectrum::standard(3).unwrap();
        for w in [Permutation::identity(3), Permutation::longest(3)] {
            let report = unstable_manifold_experiment(&w, &h, 1e-4, &cfg()).unwrap();
            assert!(
                report.passed,
                "{}",
                serde_json::to_string_pretty(&report).unwrap()
            );
        }
        let id = unstable_manifold_experiment(&Permutation::identity(3), &h, 1e-4, &cfg()).unwrap();
        assert_eq!(id.details["unstable"].as_array().unwrap().len(), 0);
        assert_eq!(id.details["generic_forward"], Value::Null);
    }

    #[test]
    fn transposition_chart() {
        let h = Spectrum::new(vec![2.0, 0.0, -2.0]).unwrap();
        let w = Permutation::parse("2 1 3").unwrap();
        let report = unstable_manifold_experiment(&w, &h, 1e-4, &cfg()).unwrap();
        assert!(
            report.passed,
            "{}",
            serde_json::to_string_pretty(&report).unwrap()
        );
        assert_eq!(report.details["unstable"], json!([[2, 1]]));
        assert_eq!(report.details["stable"], json!([[3, 1], [3, 2]]));
        assert_eq!(report.details["pairs"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn classification_survives_halving_eps() {
        let h = Spectrum::standard(3).unwrap();
        let w = Permutation::parse("3 1 2").unwrap();
        let a = unstable_manifold_experiment(&w, &h, 1e-4, &cfg()).unwrap();
        let b = unstable_manifold_experiment(&w, &h, 5e-5, &cfg()).unwrap();
        assert!(a.passed && b.passed);
        let observed = |r: &CheckReport| {
            r.details["pairs"]
                .as_array()
                .unwrap()
                .iter()
                .map(|p| p["observed"].as_str().unwrap().to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(observed(&a), observed(&b));
    }

    #[test]
    fn too_short_runs_fail() {
        let h = Spectrum::standard(3).unwrap();
        let short = IntegratorConfig::with_t_max(0.5);
        let report =
            unstable_manifold_experiment(&Permutation::identity(3), &h, 1e-4, &short).unwrap();
        assert!(!report.passed);
        assert!(report.details["mismatches"].as_u64().unwrap() > 0);
    }
}
