//! Two-point boundary-value problem: connect `q0` to `q1` by a naturally
//! parameterized extremal.
//!
//! The problem is first moved to the reduced frame where `q0 = (0, 0, 0, k0)`.
//! Normal extremals are then found by damped Newton iterations on the
//! unknowns `(α0, h30, h40, T)`, started from a fixed multistart grid, with
//! the endpoint mismatch as the residual. Endpoints that differ from `q0` only
//! in curvature are also reached by the abnormal curve `(0, 0, 0, k0 ± t)`,
//! which is reported alongside the normal candidates.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::extremal::{
    abnormal_trajectory, cost_action, cost_length, AbnormalExtremal, CurvatureSign, ExtremalClass, ExtremalState,
};
use crate::geometry::{act, angular_distance, wrap_angle_positive, ConfigurationPoint, PlanarMotion};
use crate::ode::{integrate_endpoint, IntegratorConfig, WithAngles};
use crate::trajectory::{integrate_natural, natural_system, Trajectory};

/// Converged roots closer than this in `(α0, h30, h40, T)` are duplicates.
pub const DEDUP_TOL: f64 = 1e-6;

/// Candidates whose lengths differ by less than this, or by less than the
/// residual tolerance when that is larger, are tied.
pub const LENGTH_TIE_TOL: f64 = 1e-9;

/// Step budget of one shooting integration; trial points whose flow needs
/// more steps are rejected like any other inadmissible point.
pub const SHOOTING_MAX_STEPS: usize = 5_000;

/// A Newton run is abandoned when its residual norm has not dropped below
/// `STALL_FACTOR` times its value `STALL_WINDOW` iterations earlier.
pub const STALL_WINDOW: usize = 5;
pub const STALL_FACTOR: f64 = 0.5;

/// Samples used to evaluate the cost functionals of a candidate.
pub const COST_SAMPLES: usize = 2001;

/// Sampling grid of the Newton starts, in the reduced frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartGrid {
    /// Number of uniformly spaced `α0` values on `[0, 2π)`.
    pub alpha0_count: usize,
    pub h30: Vec<f64>,
    pub h40: Vec<f64>,
    /// Multiples of the endpoint distance `ρ` used as initial durations.
    pub duration_factors: Vec<f64>,
}

impl Default for MultistartGrid {
    fn default() -> Self {
        Self {
            alpha0_count: 8,
            h30: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
            h40: vec![-1.0, 0.0, 1.0],
            duration_factors: vec![0.5, 1.0, 2.0, 4.0],
        }
    }
}

impl MultistartGrid {
    pub fn len(&self) -> usize {
        self.alpha0_count * self.h30.len() * self.h40.len() * self.duration_factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Starts `(α0, h30, h40, T)` for an endpoint distance `rho`.
    pub fn starts(&self, rho: f64) -> Vec<[f64; 4]> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.alpha0_count {
            let alpha0 = TAU * i as f64 / self.alpha0_count as f64;
            for &h30 in &self.h30 {
                for &h40 in &self.h40 {
                    for &f in &self.duration_factors {
                        out.push([alpha0, h30, h40, f * rho]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Endpoint mismatch (max-norm, reduced frame) accepted as converged.
    pub residual_tol: f64,
    pub max_newton_iters: usize,
    pub multistart_grid: MultistartGrid,
    /// Upper bound on admissible durations.
    pub t_max: f64,
    /// Upper bound on admissible `|h30|` and `|h40|`.
    pub max_momentum: f64,
    /// Forward-difference step of the Jacobian.
    pub jacobian_step: f64,
    /// Backtracking halvings per Newton step.
    pub max_halvings: usize,
    /// Integrator of the final polishing iterations.
    pub integrator: IntegratorConfig,
    /// Cheaper integrator used until the residual drops below `coarse_tol`.
    pub coarse_integrator: IntegratorConfig,
    pub coarse_tol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            max_newton_iters: 30,
            multistart_grid: MultistartGrid::default(),
            t_max: 50.0,
            max_momentum: 20.0,
            jacobian_step: 1e-7,
            max_halvings: 30,
            integrator: IntegratorConfig {
                max_steps: SHOOTING_MAX_STEPS,
                ..IntegratorConfig::default()
            },
            coarse_integrator: IntegratorConfig {
                rtol: 1e-8,
                atol: 1e-10,
                max_step: 1.0,
                max_steps: SHOOTING_MAX_STEPS,
            },
            coarse_tol: 1e-6,
        }
    }
}

impl ShootingOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(domain("residual_tol must be positive"));
        }
        if !(self.max_momentum > 0.0) {
            return Err(domain("max_momentum must be positive"));
        }
        if !(self.coarse_tol > 0.0) {
            return Err(domain("coarse_tol must be positive"));
        }
        if !(self.t_max > 0.0) {
            return Err(domain("t_max must be positive"));
        }
        if !(self.jacobian_step > 0.0) {
            return Err(domain("jacobian_step must be positive"));
        }
        self.coarse_integrator.validate()?;
        self.integrator.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValueProblem {
    pub q0: ConfigurationPoint,
    pub q1: ConfigurationPoint,
    pub options: ShootingOptions,
}

impl BoundaryValueProblem {
    pub fn new(q0: ConfigurationPoint, q1: ConfigurationPoint) -> Self {
        Self {
            q0,
            q1,
            options: ShootingOptions::default(),
        }
    }

    pub fn with_options(mut self, options: ShootingOptions) -> Self {
        self.options = options;
        self
    }
}

/// Initial data identifying a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialMomentum {
    Normal { alpha0: f64, h30: f64, h40: f64 },
    Abnormal { k0: f64, sign: CurvatureSign },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicCandidate {
    pub class: ExtremalClass,
    pub initial_momentum: InitialMomentum,
    pub duration: f64,
    /// In the original frame.
    pub trajectory: Trajectory,
    pub length: f64,
    /// Max-norm endpoint mismatch in the reduced frame.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution {
    /// Sorted by length, shortest first.
    pub candidates: Vec<GeodesicCandidate>,
    /// Motion taking `q0` to the reduced frame.
    pub reduction: PlanarMotion,
}

impl BvpSolution {
    pub fn best(&self) -> &GeodesicCandidate {
        &self.candidates[0]
    }
}

/// The motion `g` with `act(g, q0) = (0, 0, 0, k0)`, and that reduced point.
pub fn normalize(q0: &ConfigurationPoint) -> (PlanarMotion, ConfigurationPoint) {
    let phi = -q0.theta;
    let (s, c) = phi.sin_cos();
    let g = PlanarMotion::new(-(c * q0.x - s * q0.y), -(s * q0.x + c * q0.y), phi);
    (g, ConfigurationPoint::new(0.0, 0.0, 0.0, q0.k))
}

fn reduced_start(k0: f64, alpha0: f64, h30: f64, h40: f64) -> ExtremalState {
    ExtremalState::new(ConfigurationPoint::new(0.0, 0.0, 0.0, k0), alpha0, h30, h40)
}

fn endpoint(start: &ExtremalState, duration: f64, cfg: &IntegratorConfig) -> Result<ExtremalState> {
    let end = integrate_endpoint(&natural_system(), start.to_array(), (0.0, duration), cfg)?;
    Ok(ExtremalState::from_array(end))
}

/// Endpoint mismatch `(Δx, Δy, Δθ, Δk)` after flowing for `duration` from
/// `((0, 0, 0, k0), α0, h30, h40)`; `Δθ` is measured on the circle.
pub fn residual(
    momentum: (f64, f64, f64),
    duration: f64,
    k0: f64,
    q1_reduced: &ConfigurationPoint,
    cfg: &IntegratorConfig,
) -> Result<[f64; 4]> {
    if !(duration > 0.0) {
        return Err(domain(format!("shooting duration must be positive, got {duration}")));
    }
    let (alpha0, h30, h40) = momentum;
    let end = endpoint(&reduced_start(k0, alpha0, h30, h40), duration, cfg)?;
    Ok(end.q.difference(q1_reduced))
}

/// Integrates the time-reversed flow from `end` for `duration`.
pub fn integrate_backward(end: &ExtremalState, duration: f64, cfg: &IntegratorConfig) -> Result<ExtremalState> {
    let reversed = WithAngles::new(
        |_: f64, s: &[f64; 7]| crate::extremal::normal_rhs_natural(s).map(|v| -v),
        &[2, 4],
    );
    let start = integrate_endpoint(&reversed, end.to_array(), (0.0, duration), cfg)?;
    Ok(ExtremalState::from_array(start))
}

fn max_abs(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct NewtonOutcome {
    x: [f64; 4],
    residual: f64,
    converged: bool,
}

/// Damped Newton on `(α0, h30, h40, T)` with a forward-difference Jacobian,
/// stopping once the max-norm residual is at most `tol`.
fn damped_newton(
    start: [f64; 4],
    k0: f64,
    q1: &ConfigurationPoint,
    opts: &ShootingOptions,
    cfg: &IntegratorConfig,
    tol: f64,
) -> NewtonOutcome {
    let eval = |x: &[f64; 4]| -> Option<[f64; 4]> {
        let admissible = x[3] > 0.0 && x[3] <= opts.t_max && x[1].abs().max(x[2].abs()) <= opts.max_momentum;
        if !admissible || x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        residual((x[0], x[1], x[2]), x[3], k0, q1, cfg).ok()
    };
    let failed = |x, residual| NewtonOutcome {
        x,
        residual,
        converged: false,
    };

    let mut x = start;
    let Some(mut r) = eval(&x) else {
        return failed(x, f64::INFINITY);
    };
    let mut history = vec![norm2(&r)];
    for _ in 0..opts.max_newton_iters {
        if max_abs(&r) <= tol {
            return NewtonOutcome {
                x,
                residual: max_abs(&r),
                converged: true,
            };
        }
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let step = opts.jacobian_step * x[j].abs().max(1.0);
            let mut xp = x;
            xp[j] += step;
            let Some(rp) = eval(&xp) else {
                return failed(x, max_abs(&r));
            };
            for i in 0..4 {
                jac[(i, j)] = (rp[i] - r[i]) / step;
            }
        }
        let rhs = -Vector4::from(r);
        let Ok(dx) = jac.svd(true, true).solve(&rhs, 1e-14) else {
            break;
        };

        let current = norm2(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: [f64; 4] = std::array::from_fn(|i| x[i] + lambda * dx[i]);
            if let Some(rt) = eval(&trial) {
                if norm2(&rt) < current {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((xn, rn)) = accepted else {
            break;
        };
        x = xn;
        r = rn;
        history.push(norm2(&r));
        if history.len() > STALL_WINDOW
            && history[history.len() - 1] > STALL_FACTOR * history[history.len() - 1 - STALL_WINDOW]
        {
            break;
        }
    }
    let res = max_abs(&r);
    NewtonOutcome {
        x,
        residual: res,
        converged: res <= tol,
    }
}

/// Newton with the coarse integrator down to `coarse_tol`, then polished
/// with the full integrator down to `residual_tol`.
fn shoot(start: [f64; 4], k0: f64, q1: &ConfigurationPoint, opts: &ShootingOptions) -> NewtonOutcome {
    let coarse = damped_newton(
        start,
        k0,
        q1,
        opts,
        &opts.coarse_integrator,
        opts.coarse_tol.max(opts.residual_tol),
    );
    if !coarse.converged {
        return coarse;
    }
    damped_newton(coarse.x, k0, q1, opts, &opts.integrator, opts.residual_tol)
}

fn start_space_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let da = angular_distance(a[0], b[0]);
    (da * da + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2) + (a[3] - b[3]).powi(2)).sqrt()
}

fn quantize(v: f64, step: f64) -> i64 {
    (v / step).round() as i64
}

/// Tie-break among candidates of equal length: abnormal first, then by `|h30|`,
/// `|h40|` (to `DEDUP_TOL`) and `α0 mod 2π`.
fn tie_break(a: &GeodesicCandidate, b: &GeodesicCandidate) -> Ordering {
    let key = |c: &GeodesicCandidate| match c.initial_momentum {
        InitialMomentum::Abnormal { .. } => (0, 0, 0, 0.0),
        InitialMomentum::Normal { alpha0, h30, h40 } => (
            1,
            quantize(h30.abs(), DEDUP_TOL),
            quantize(h40.abs(), DEDUP_TOL),
            wrap_angle_positive(alpha0),
        ),
    };
    let (ka, kb) = (key(a), key(b));
    (ka.0, ka.1, ka.2)
        .cmp(&(kb.0, kb.1, kb.2))
        .then(ka.3.total_cmp(&kb.3))
        .then(a.length.total_cmp(&b.length))
}

/// Shorter first. Starting from the shortest remaining candidate, every
/// candidate within `tie_tol` of its length forms one tied group ordered by
/// [`tie_break`].
fn order_candidates(candidates: &mut [GeodesicCandidate], tie_tol: f64) {
    candidates.sort_by(|a, b| a.length.total_cmp(&b.length));
    let mut start = 0;
    while start < candidates.len() {
        let limit = candidates[start].length + tie_tol;
        let end = start + candidates[start..].iter().take_while(|c| c.length <= limit).count();
        candidates[start..end].sort_by(tie_break);
        start = end;
    }
}

fn abnormal_candidate(k0: f64, k1: f64, q1_reduced: &ConfigurationPoint) -> Result<GeodesicCandidate> {
    let duration = (k1 - k0).abs();
    let sign = CurvatureSign::of(k1 - k0);
    let e = AbnormalExtremal::new(k0, sign);
    let alpha = sign.value() * FRAC_PI_2;
    let times = vec![0.0, duration];
    let states = times
        .iter()
        .map(|&t| Ok(ExtremalState::new(abnormal_trajectory(&e, t)?, alpha, 0.0, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let residual = max_abs(&states[1].q.difference(q1_reduced));
    Ok(GeodesicCandidate {
        class: ExtremalClass::Abnormal,
        initial_momentum: InitialMomentum::Abnormal { k0, sign },
        duration,
        trajectory: Trajectory::from_samples(times, states)?,
        length: duration,
        residual,
    })
}

/// Finds extremals connecting `p.q0` to `p.q1`, shortest first.
pub fn solve(p: &BoundaryValueProblem) -> Result<BvpSolution> {
    let opts = &p.options;
    opts.validate()?;
    if !p.q0.is_finite() || !p.q1.is_finite() {
        return Err(domain("boundary configurations must be finite"));
    }
    let (g, q0r) = normalize(&p.q0);
    let back = g.inverse();
    let q1r = act(&g, &p.q1);
    let k0 = q0r.k;
    let rho = q1r.distance(&q0r);

    if max_abs(&q1r.difference(&q0r)) <= opts.residual_tol {
        let start = ExtremalState::new(p.q0, 0.0, 0.0, 0.0);
        let trivial = GeodesicCandidate {
            class: ExtremalClass::Normal,
            initial_momentum: InitialMomentum::Normal {
                alpha0: 0.0,
                h30: 0.0,
                h40: 0.0,
            },
            duration: 0.0,
            trajectory: Trajectory::from_samples(vec![0.0], vec![start])?,
            length: 0.0,
            residual: max_abs(&q1r.difference(&q0r)),
        };
        return Ok(BvpSolution {
            candidates: vec![trivial],
            reduction: g,
        });
    }

    let mut candidates = Vec::new();
    let planar = [q1r.x, q1r.y, angular_distance(q1r.theta, 0.0)];
    if planar.iter().all(|v| v.abs() <= opts.residual_tol) {
        let mut c = abnormal_candidate(k0, q1r.k, &q1r)?;
        c.trajectory = c.trajectory.transformed(&back);
        candidates.push(c);
    }

    let starts = opts.multistart_grid.starts(rho);
    let outcomes: Vec<NewtonOutcome> = starts.par_iter().map(|s| shoot(*s, k0, &q1r, opts)).collect();
    let best_residual = outcomes.iter().map(|o| o.residual).fold(f64::INFINITY, f64::min);

    let mut roots: Vec<([f64; 4], f64)> = Vec::new();
    for o in &outcomes {
        if o.converged {
            let mut x = o.x;
            x[0] = wrap_angle_positive(x[0]);
            if roots.iter().all(|(r, _)| start_space_distance(r, &x) >= DEDUP_TOL) {
                roots.push((x, o.residual));
            }
        }
    }

    let normals: Vec<Result<GeodesicCandidate>> = roots
        .par_iter()
        .map(|(x, res)| {
            let traj = integrate_natural(&reduced_start(k0, x[0], x[1], x[2]), x[3], &opts.integrator)?;
            Ok(GeodesicCandidate {
                class: ExtremalClass::Normal,
                initial_momentum: InitialMomentum::Normal {
                    alpha0: x[0],
                    h30: x[1],
                    h40: x[2],
                },
                duration: x[3],
                trajectory: traj.transformed(&back),
                length: x[3],
                residual: *res,
            })
        })
        .collect();
    for c in normals {
        candidates.push(c?);
    }

    if candidates.is_empty() {
        return Err(Error::NoSolution { best_residual });
    }
    order_candidates(&mut candidates, LENGTH_TIE_TOL.max(opts.residual_tol));
    Ok(BvpSolution {
        candidates,
        reduction: g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub class: ExtremalClass,
    pub duration: f64,
    pub length: f64,
    pub action: f64,
    /// `|action − length/2|`; zero under natural parameterization.
    pub identity_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub rows: Vec<CostRow>,
}

impl CostReport {
    pub fn max_identity_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.identity_gap).fold(0.0, f64::max)
    }
}

/// Length and action of every candidate, by quadrature of its controls.
pub fn compare_costs(sol: &BvpSolution) -> Result<CostReport> {
    if sol.candidates.is_empty() {
        return Err(domain("no candidates to compare"));
    }
    let rows = sol
        .candidates
        .iter()
        .map(|c| {
            if c.duration == 0.0 {
                return Ok(CostRow {
                    class: c.class,
                    duration: 0.0,
                    length: 0.0,
                    action: 0.0,
                    identity_gap: 0.0,
                });
            }
            let controls: Vec<_> = c
                .trajectory
                .uniform_samples(COST_SAMPLES)
                .iter()
                .map(|(_, s)| s.controls())
                .collect();
            let dt = c.duration / (COST_SAMPLES - 1) as f64;
            let length = cost_length(&controls, dt)?;
            let action = cost_action(&controls, dt)?;
            Ok(CostRow {
                class: c.class,
                duration: c.duration,
                length,
                action,
                identity_gap: (action - length / 2.0).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CostReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalize_examples() {
        let (g, r) = normalize(&ConfigurationPoint::new(0.0, 0.0, 0.0, 3.0));
        assert_eq!(g, PlanarMotion::new(-0.0, -0.0, -0.0));
        assert_eq!(r, ConfigurationPoint::new(0.0, 0.0, 0.0, 3.0));
        let (g, r) = normalize(&ConfigurationPoint::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!((g.tx, g.ty, g.phi), (-1.0, -0.0, -0.0));
        assert_eq!(r, ConfigurationPoint::ORIGIN);
        let q0 = ConfigurationPoint::new(2.0, -1.5, 4.0, 0.7);
        let (g, r) = normalize(&q0);
        assert!(act(&g, &q0).max_deviation(&r) < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let cfg = IntegratorConfig::default();
        let r = residual(
            (0.0, 0.0, 0.0),
            0.75,
            0.0,
            &ConfigurationPoint::new(0.75, 0.0, 0.0, 0.0),
            &cfg,
        )
        .unwrap();
        assert!(max_abs(&r) < 1e-12);
        let r = residual(
            (0.0, 0.0, 0.0),
            1.0,
            0.0,
            &ConfigurationPoint::new(2.0, 0.0, 0.0, 0.0),
            &cfg,
        )
        .unwrap();
        assert_abs_diff_eq!(r[0], -1.0, epsilon = 1e-12);
        assert!(r[1..].iter().all(|v| v.abs() < 1e-12));
        assert!(residual((0.0, 0.0, 0.0), 0.0, 0.0, &ConfigurationPoint::ORIGIN, &cfg).is_err());
    }

    #[test]
    fn residual_on_periodic_family() {
        let cfg = IntegratorConfig::default();
        let start = reduced_start(0.0, FRAC_PI_2, 1.0, 0.0);
        let target = endpoint(&start, TAU, &cfg).unwrap().q;
        let r = residual((FRAC_PI_2, 1.0, 0.0), TAU, 0.0, &target, &cfg).unwrap();
        assert!(max_abs(&r) < 1e-8);
    }

    #[test]
    fn straight_segments() {
        for d in [0.5, 1.0] {
            let sol = solve(&BoundaryValueProblem::new(
                ConfigurationPoint::ORIGIN,
                ConfigurationPoint::new(d, 0.0, 0.0, 0.0),
            ))
            .unwrap();
            let best = sol.best();
            assert_eq!(best.class, ExtremalClass::Normal);
            assert_abs_diff_eq!(best.length, d, epsilon = 1e-9);
            match best.initial_momentum {
                InitialMomentum::Normal { alpha0, h30, h40 } => {
                    assert!(angular_distance(alpha0, 0.0).abs() < 1e-6);
                    assert!(h30.abs() < 1e-6 && h40.abs() < 1e-6);
                }
                other => panic!("unexpected {other:?}"),
            }
            let report = compare_costs(&sol).unwrap();
            assert_abs_diff_eq!(report.rows[0].action, d / 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn curvature_only_endpoint_has_abnormal_candidate() {
        let sol = solve(&BoundaryValueProblem::new(
            ConfigurationPoint::ORIGIN,
            ConfigurationPoint::new(0.0, 0.0, 0.0, 1.0),
        ))
        .unwrap();
        let abnormal: Vec<_> = sol
            .candidates
            .iter()
            .filter(|c| c.class == ExtremalClass::Abnormal)
            .collect();
        assert_eq!(abnormal.len(), 1);
        assert_abs_diff_eq!(abnormal[0].length, 1.0, epsilon = 1e-15);
        assert_eq!(sol.best().class, ExtremalClass::Abnormal);
        for (_, s) in abnormal[0].trajectory.uniform_samples(11) {
            assert_eq!((s.q.x, s.q.y, s.q.theta), (0.0, 0.0, 0.0));
        }
        let report = compare_costs(&sol).unwrap();
        assert_abs_diff_eq!(report.rows[0].length, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rows[0].action, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn coincident_endpoints_are_trivial() {
        let q = ConfigurationPoint::new(1.0, 2.0, 0.3, -0.5);
        let sol = solve(&BoundaryValueProblem::new(q, q)).unwrap();
        assert_eq!(sol.candidates.len(), 1);
        assert_eq!(sol.best().length, 0.0);
    }

    #[test]
    fn backward_flow_returns_to_start() {
        let cfg = IntegratorConfig::default();
        let start = reduced_start(0.2, 0.9, -0.4, 0.3);
        let end = endpoint(&start, 2.5, &cfg).unwrap();
        let back = integrate_backward(&end, 2.5, &cfg).unwrap();
        for (a, b) in back.to_array().iter().zip(start.to_array()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn grid_has_expected_size() {
        let grid = MultistartGrid::default();
        assert_eq!(grid.len(), 8 * 7 * 3 * 4);
        let starts = grid.starts(2.0);
        assert_eq!(starts.len(), grid.len());
        assert_eq!(starts[0], [0.0, -2.0, -1.0, 1.0]);
    }
}
