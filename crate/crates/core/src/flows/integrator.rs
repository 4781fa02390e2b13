//! Dormand-Prince 5(4) with a PI step-size controller.

use serde::{Deserialize, Serialize};

use super::{Field, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

pub const INITIAL_STEP: f64 = 1e-3;
pub const MIN_STEP: f64 = 1e-14;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const BETA: f64 = 0.04;
/// Upper bound on `h·ρ`, with ρ the local Lipschitz estimate of the field;
/// the real stability interval of the method ends near 3.3.
const STABILITY_LIMIT: f64 = 3.0;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_max: f64,
    pub stop_field_norm: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1.0,
            t_max: 100.0,
            stop_field_norm: 1e-10,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_max(t_max: f64) -> Self {
        IntegratorConfig {
            t_max,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("t_max", self.t_max),
            ("stop_field_norm", self.stop_field_norm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Integrates `x' = f(x)` from `t = 0`, recording every accepted state.
///
/// Stops at `t_max`, when the field norm drops below `stop_field_norm`, or
/// when `stop(t, x)` returns true after an accepted step.
pub fn integrate_with<F, S>(
    f: F,
    x0: &SquareMatrix,
    cfg: &IntegratorConfig,
    stop: S,
) -> Result<Trajectory>
where
    F: Fn(&SquareMatrix) -> SquareMatrix,
    S: Fn(f64, &SquareMatrix) -> bool,
{
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(Error::MalformedMatrix(
            "initial state has a non-finite entry".into(),
        ));
    }
    let n = x0.n();
    let mut traj = Trajectory::start(x0.clone());
    let mut x = x0.clone();
    let mut t = 0.0;
    let mut k1 = f(&x);
    traj.final_field_norm = k1.norm();
    if traj.final_field_norm < cfg.stop_field_norm {
        return Ok(traj);
    }

    let mut h = INITIAL_STEP.min(cfg.max_step);
    let mut prev_err: f64 = 1e-4;
    let mut rejected_last = false;
    let mut k = vec![SquareMatrix::zeros(n); 6];

    while t < cfg.t_max {
        let step = h.min(cfg.t_max - t);
        if step < MIN_STEP && t + step < cfg.t_max {
            return Err(Error::StepSizeUnderflow {
                t,
                step,
                partial: Box::new(traj),
            });
        }
        k[0] = k1.clone();
        let mut stage6 = x.clone();
        for s in 1..6 {
            let mut stage = x.clone();
            for (r, coeff) in A[s].iter().enumerate().take(s) {
                if *coeff != 0.0 {
                    axpy(&mut stage, step * coeff, &k[r]);
                }
            }
            k[s] = f(&stage);
            if s == 5 {
                stage6 = stage;
            }
        }
        // the last stage is evaluated at the fifth-order solution
        let mut x_new = x.clone();
        for (r, coeff) in A[6].iter().enumerate() {
            if *coeff != 0.0 {
                axpy(&mut x_new, step * coeff, &k[r]);
            }
        }
        let k7 = f(&x_new);
        // stages 6 and 7 sit at the same time, which gives a cheap estimate
        // of the field's Lipschitz constant along the step
        let stage6_gap = x_new.dist(&stage6);
        let rho = if stage6_gap > 0.0 {
            k7.dist(&k[5]) / stage6_gap
        } else {
            0.0
        };
        let mut err_sq = 0.0;
        for idx in 0..n * n {
            let mut e = 0.0;
            for (r, coeff) in E.iter().enumerate() {
                let kr = if r == 6 { &k7 } else { &k[r] };
                e += coeff * kr.as_slice()[idx];
            }
            e *= step;
            let scale = cfg.abs_tol
                + cfg.rel_tol * x.as_slice()[idx].abs().max(x_new.as_slice()[idx].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / (n * n) as f64).sqrt();
        if !err.is_finite() {
            traj.rejected_steps += 1;
            h = step * MIN_FACTOR;
            rejected_last = true;
            continue;
        }

        if err <= 1.0 {
            t += step;
            x = x_new;
            k1 = k7;
            traj.times.push(t);
            traj.states.push(x.clone());
            traj.accepted_steps += 1;
            traj.final_field_norm = k1.norm();

            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                SAFETY * err.powf(-ALPHA) * prev_err.powf(BETA)
            };
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if rejected_last {
                factor = factor.min(1.0);
            }
            prev_err = err.max(1e-4);
            rejected_last = false;
            h = (step * factor).min(cfg.max_step);
            if rho > 0.0 {
                h = h.min(STABILITY_LIMIT / rho);
            }

            if traj.final_field_norm < cfg.stop_field_norm || stop(t, &x) {
                break;
            }
        } else {
            traj.rejected_steps += 1;
            let factor = (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
            h = step * factor;
            rejected_last = true;
        }
    }
    Ok(traj)
}

fn axpy(y: &mut SquareMatrix, a: f64, x: &SquareMatrix) {
    let n = y.n();
    for i in 0..n {
        for j in 0..n {
            y[(i, j)] += a * x[(i, j)];
        }
    }
}

/// Forward integration of one of the isospectral fields.
pub fn integrate(field: Field, x0: &SquareMatrix, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_with(|x| field.eval(x), x0, cfg, |_, _| false)
}

/// Integration of the negated field; trajectory times count backward time.
pub fn integrate_backward(
    field: Field,
    x0: &SquareMatrix,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_with(|x| field.eval(x).scale(-1.0), x0, cfg, |_, _| false)
}

/// State at exactly time `t` (no stopping on small fields).
pub fn state_at(
    field: Field,
    x0: &SquareMatrix,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<SquareMatrix> {
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let sign = t.signum();
    let run = IntegratorConfig {
        t_max: t.abs(),
        stop_field_norm: f64::MIN_POSITIVE,
        ..cfg.clone()
    };
    let traj = integrate_with(|x| field.eval(x).scale(sign), x0, &run, |_, _| false)?;
    Ok(traj.last().clone())
}

/// Runs until the field norm falls below `stop_field_norm` and checks the
/// shape of the limit: diagonal for Toda, symmetric for Sym (within 1e-7).
pub fn limit_point(
    field: Field,
    x0: &SquareMatrix,
    cfg: &IntegratorConfig,
) -> Result<SquareMatrix> {
    let traj = integrate(field, x0, cfg)?;
    if traj.final_field_norm >= cfg.stop_field_norm {
        return Err(Error::Timeout {
            t_max: cfg.t_max,
            field_norm: traj.final_field_norm,
            partial: Box::new(traj),
        });
    }
    let limit = traj.last().clone();
    match field {
        Field::Toda => {
            let deviation = limit.off_diagonal_max_abs();
            if deviation > 1e-7 {
                return Err(Error::LimitShape {
                    expected: "diagonal",
                    deviation,
                });
            }
        }
        Field::Sym => {
            let deviation = limit.asymmetry();
            if deviation > 1e-7 {
                return Err(Error::LimitShape {
                    expected: "symmetric",
                    deviation,
                });
            }
        }
    }
    Ok(limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{btheta_norm_sq, Spectrum};
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponential_decay_accuracy() {
        let x0 = SquareMatrix::diag(&[1.0, -1.0]);
        let cfg = IntegratorConfig::with_t_max(3.0);
        let traj = integrate_with(|x| x.scale(-1.0), &x0, &cfg, |_, _| false).unwrap();
        assert_eq!(traj.final_time(), 3.0);
        assert!((traj.last()[(0, 0)] - (-3f64).exp()).abs() < 1e-10);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(traj.times.len(), traj.states.len());
    }

    #[test]
    fn fifth_order_convergence() {
        // x' = x² on a scalar embedded in the (0,0) entry, x(0) = 1/2: x = 1/(2 − t)
        let x0 = SquareMatrix::diag(&[0.5, 0.0]);
        let f = |x: &SquareMatrix| SquareMatrix::diag(&[x[(0, 0)] * x[(0, 0)], 0.0]);
        for tol in [1e-8, 1e-11] {
            let cfg = IntegratorConfig {
                rel_tol: tol,
                abs_tol: tol,
                t_max: 1.5,
                ..Default::default()
            };
            let traj = integrate_with(f, &x0, &cfg, |_, _| false).unwrap();
            let err = (traj.last()[(0, 0)] - 2.0).abs();
            assert!(err < 2000.0 * tol, "tol {tol}: err {err}");
        }
    }

    #[test]
    fn diagonal_start_is_stationary() {
        let traj = integrate(
            Field::Toda,
            &SquareMatrix::diag(&[2.0, 0.0, -2.0]),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.accepted_steps, 0);
    }

    #[test]
    fn two_by_two_toda_limit() {
        // with y = [[a, b], [b, −a]], a = cos θ, b = sin θ, θ' = −2 sin θ, so
        // tan(θ/2) = tan(θ₀/2)·e^{−2t}
        let x0 = SquareMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let cfg = IntegratorConfig::with_t_max(30.0);
        let limit = limit_point(Field::Toda, &x0, &cfg).unwrap();
        assert!(limit.dist(&SquareMatrix::diag(&[1.0, -1.0])) < 1e-8);
        for t in [0.5f64, 2.0, 5.0] {
            let theta =
                2.0 * ((std::f64::consts::FRAC_PI_4).tan() * (-2.0 * t as f64).exp()).atan();
            let x = state_at(Field::Toda, &x0, t, &cfg).unwrap();
            assert!((x[(0, 0)] - theta.cos()).abs() < 1e-9);
            assert!((x[(0, 1)] - theta.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn sorting_attractor_n4() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = Spectrum::new(vec![3.0, 1.0, -1.0, -3.0]).unwrap();
        let cfg = IntegratorConfig::with_t_max(200.0);
        for _ in 0..5 {
            let x0 = sampling::symmetric_with_spectrum(&h, &mut rng);
            let traj = integrate(Field::Toda, &x0, &cfg).unwrap();
            assert!(traj.last().dist(&h.to_diag()) < 1e-7);
            assert!(traj.isospectral_drift() < 1e-8);
            assert!(traj.max_over_states(|s| s.asymmetry()) < 1e-9);
        }
    }

    #[test]
    fn sym_flow_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = IntegratorConfig::with_t_max(200.0);
        for n in [3, 4] {
            let x0 = sampling::traceless_gaussian(n, &mut rng).scale(0.5);
            let traj = integrate(Field::Sym, &x0, &cfg).unwrap();
            assert!(traj.isospectral_drift() < 1e-8);
            let norms: Vec<f64> = traj.states.iter().map(btheta_norm_sq).collect();
            assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-10));
        }
        let up = SquareMatrix::from_rows(&[[3.0, 1.0, -2.0], [0.0, 1.0, 0.5], [0.0, 0.0, -4.0]])
            .unwrap();
        let limit = limit_point(Field::Sym, &up, &cfg).unwrap();
        assert!(limit.dist(&SquareMatrix::diag(&[3.0, 1.0, -4.0])) < 1e-7);
    }

    #[test]
    fn backward_and_state_at() {
        let x0 = SquareMatrix::from_rows(&[[0.6, 0.8], [0.8, -0.6]]).unwrap();
        let cfg = IntegratorConfig::default();
        let fwd = state_at(Field::Toda, &x0, 1.0, &cfg).unwrap();
        let back = state_at(Field::Toda, &fwd, -1.0, &cfg).unwrap();
        assert!(back.dist(&x0) < 1e-9);
        let traj =
            integrate_backward(Field::Toda, &x0, &IntegratorConfig::with_t_max(40.0)).unwrap();
        assert!(traj.last().dist(&SquareMatrix::diag(&[-1.0, 1.0])) < 1e-8);
    }

    #[test]
    fn config_and_timeouts() {
        let bad = IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let x0 = SquareMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        match limit_point(Field::Toda, &x0, &IntegratorConfig::with_t_max(1.0)) {
            Err(Error::Timeout { partial, .. }) => assert!(partial.len() > 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn step_size_underflow_is_reported() {
        // x' = x² with x(0) = 1 blows up at t = 1
        let x0 = SquareMatrix::diag(&[1.0, 0.0]);
        let f = |x: &SquareMatrix| SquareMatrix::diag(&[x[(0, 0)] * x[(0, 0)], 0.0]);
        let cfg = IntegratorConfig::with_t_max(2.0);
        match integrate_with(f, &x0, &cfg, |_, _| false) {
            Err(Error::StepSizeUnderflow { partial, t, .. }) => {
                assert!(t < 1.0 && t > 0.9);
                assert!(partial.len() > 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let x0 = SquareMatrix::from_rows(&[[0.1, 1.0 / 3.0], [1.0 / 3.0, -0.1]]).unwrap();
        let traj = integrate(Field::Toda, &x0, &IntegratorConfig::with_t_max(0.5)).unwrap();
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,e11,e12,e21,e22\n"));
        let (times, states) = Trajectory::from_csv(&csv).unwrap();
        assert_eq!(times, traj.times);
        assert_eq!(states, traj.states);
    }
}
