//! Poincaré sections of the momentum subsystem.
//!
//! The variables `(α, h3, h4, k)` evolve independently of the position and
//! orientation:
//!
//! ```text
//! α' = h3,  h3' = h4 cos α,  h4' = −k cos α (k h3 + cos α),  k' = sin α
//! ```
//!
//! For every `h30 ≠ 0` the curve `α = π/2 + t h30`, `h3 = h30`, `h4 = 0`,
//! `k = sin(t h30)/h30` is periodic with period `|2π/h30|`, so the points
//! `(π/2, h30, 0)` are fixed by the return map to the section `k = 0`.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::wrap_angle_positive;
use crate::ode::{integrate_until_event, CrossingDirection, EventSpec, IntegratorConfig, WithAngles};

/// Return-time search horizon, in multiples of the guess `|2π/h3|`.
pub const RETURN_HORIZON_FACTOR: f64 = 10.0;

/// Return-time search horizon when `h3 = 0`.
pub const RETURN_HORIZON_FLAT: f64 = 100.0;

/// Orbits whose points all lie this close to their centroid are fixed points.
pub const FIXED_POINT_TOL: f64 = 1e-9;

/// Minimum orbit length accepted by [`orbit_closedness`].
pub const MIN_CLOSEDNESS_POINTS: usize = 50;

/// `(α, h3, h4, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedState {
    pub alpha: f64,
    pub h3: f64,
    pub h4: f64,
    pub k: f64,
}

impl ReducedState {
    pub const fn new(alpha: f64, h3: f64, h4: f64, k: f64) -> Self {
        Self { alpha, h3, h4, k }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.alpha, self.h3, self.h4, self.k]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// Vector field of the momentum subsystem in `(α, h3, h4, k)`.
pub fn reduced_rhs(s: &[f64; 4]) -> [f64; 4] {
    let [alpha, h3, h4, k] = *s;
    let (sa, ca) = alpha.sin_cos();
    [h3, h4 * ca, -k * ca * (k * h3 + ca), sa]
}

/// Member of the one-parameter periodic family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSeed {
    h30: f64,
}

impl PeriodicSeed {
    pub fn new(h30: f64) -> Result<Self> {
        if h30 == 0.0 || !h30.is_finite() {
            return Err(domain("periodic family parameter h30 must be finite and non-zero"));
        }
        Ok(Self { h30 })
    }

    pub fn h30(&self) -> f64 {
        self.h30
    }

    pub fn period(&self) -> f64 {
        (TAU / self.h30).abs()
    }

    pub fn initial_state(&self) -> ReducedState {
        ReducedState::new(FRAC_PI_2, self.h30, 0.0, 0.0)
    }
}

/// Closed form of the periodic family at time `t`.
pub fn periodic_orbit(seed: &PeriodicSeed, t: f64) -> ReducedState {
    let h30 = seed.h30;
    ReducedState::new(FRAC_PI_2 + t * h30, h30, 0.0, (t * h30).sin() / h30)
}

/// A point on the section `k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectionPoint {
    /// Unwrapped.
    pub alpha: f64,
    pub h3: f64,
    pub h4: f64,
    pub crossing_time: f64,
}

impl SectionPoint {
    pub fn new(alpha: f64, h3: f64, h4: f64) -> Self {
        Self {
            alpha,
            h3,
            h4,
            crossing_time: 0.0,
        }
    }

    pub fn alpha_mod_2pi(&self) -> f64 {
        wrap_angle_positive(self.alpha)
    }

    /// `(α mod 2π, h3, h4)`.
    pub fn chart(&self) -> [f64; 3] {
        [self.alpha_mod_2pi(), self.h3, self.h4]
    }

    pub fn state(&self) -> ReducedState {
        ReducedState::new(self.alpha, self.h3, self.h4, 0.0)
    }
}

/// Time after which the return search gives up.
pub fn return_horizon(h3: f64) -> f64 {
    if h3 == 0.0 {
        RETURN_HORIZON_FLAT
    } else {
        RETURN_HORIZON_FACTOR * (TAU / h3).abs()
    }
}

/// Next crossing of `k = 0` in `direction`, starting on the section at
/// `start`.
///
/// The returned point's `crossing_time` is the return time.
pub fn poincare_map(
    start: &SectionPoint,
    direction: CrossingDirection,
    cfg: &IntegratorConfig,
) -> Result<SectionPoint> {
    let horizon = return_horizon(start.h3);
    let mut ev = EventSpec::new(|_: f64, s: &[f64; 4]| s[3], direction);
    if start.h3 != 0.0 {
        ev = ev.with_guess((TAU / start.h3).abs());
    }
    let system = WithAngles::new(|_: f64, s: &[f64; 4]| reduced_rhs(s), &[0]);
    let (_, hit) = integrate_until_event(&system, start.state().to_array(), 0.0, horizon, cfg, &ev)?;
    match hit {
        Some((t, s)) => Ok(SectionPoint {
            alpha: s[0],
            h3: s[1],
            h4: s[2],
            crossing_time: t,
        }),
        None => Err(Error::NoReturn { iteration: 1, horizon }),
    }
}

/// Successive section crossings from one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareOrbit {
    /// `(α0, h30, h40, k0)` with `k0 = 0`.
    pub seed: ReducedState,
    /// Crossing times are cumulative from the seed.
    pub points: Vec<SectionPoint>,
    pub iterations: usize,
}

/// Iterates the return map `n` times from `(α0, h30, h40)` on the section.
pub fn orbit(
    seed: (f64, f64, f64),
    n: usize,
    direction: CrossingDirection,
    cfg: &IntegratorConfig,
) -> Result<PoincareOrbit> {
    if n < 1 {
        return Err(domain("orbit needs at least one iteration"));
    }
    let (alpha0, h30, h40) = seed;
    let mut current = SectionPoint::new(alpha0, h30, h40);
    let mut elapsed = 0.0;
    let mut points = Vec::with_capacity(n);
    for iteration in 1..=n {
        let next = poincare_map(&current, direction, cfg).map_err(|e| match e {
            Error::NoReturn { horizon, .. } => Error::NoReturn { iteration, horizon },
            other => other,
        })?;
        elapsed += next.crossing_time;
        current = SectionPoint {
            crossing_time: elapsed,
            ..next
        };
        points.push(current);
    }
    Ok(PoincareOrbit {
        seed: ReducedState::new(alpha0, h30, h40, 0.0),
        points,
        iterations: n,
    })
}

/// Orbits for several seeds, computed in parallel.
pub fn orbits(
    seeds: &[(f64, f64, f64)],
    n: usize,
    direction: CrossingDirection,
    cfg: &IntegratorConfig,
) -> Vec<Result<PoincareOrbit>> {
    seeds.par_iter().map(|s| orbit(*s, n, direction, cfg)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Closedness {
    /// Largest gap between angularly consecutive points over the perimeter.
    pub ratio: f64,
    /// All points coincide: the seed is a fixed point.
    pub fixed_point: bool,
}

/// How completely an orbit fills a closed curve.
///
/// Points `(α mod 2π, h3, h4)` are projected onto their best-fit plane,
/// ordered by angle around the centroid, and the largest gap between
/// neighbours is divided by the length of the resulting closed polygon.
pub fn orbit_closedness(orbit: &PoincareOrbit) -> Result<Closedness> {
    let n = orbit.points.len();
    if n < MIN_CLOSEDNESS_POINTS {
        return Err(domain(format!(
            "closedness needs at least {MIN_CLOSEDNESS_POINTS} points, orbit has {n}"
        )));
    }
    let pts: Vec<Vector3<f64>> = orbit.points.iter().map(|p| Vector3::from(p.chart())).collect();
    let centroid = pts.iter().sum::<Vector3<f64>>() / n as f64;
    let spread = pts.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
    if spread <= FIXED_POINT_TOL {
        return Ok(Closedness {
            ratio: 0.0,
            fixed_point: true,
        });
    }

    let cov = pts
        .iter()
        .map(|p| {
            let d = p - centroid;
            d * d.transpose()
        })
        .sum::<Matrix3<f64>>();
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let e1 = eig.eigenvectors.column(order[0]).into_owned();
    let e2 = eig.eigenvectors.column(order[1]).into_owned();

    let mut planar: Vec<(f64, f64, f64)> = pts
        .iter()
        .map(|p| {
            let d = p - centroid;
            let (u, v) = (d.dot(&e1), d.dot(&e2));
            (v.atan2(u), u, v)
        })
        .collect();
    planar.sort_by(|a, b| a.0.total_cmp(&b.0));

    let gaps: Vec<f64> = (0..n)
        .map(|i| {
            let (_, u0, v0) = planar[i];
            let (_, u1, v1) = planar[(i + 1) % n];
            (u1 - u0).hypot(v1 - v0)
        })
        .collect();
    let perimeter: f64 = gaps.iter().sum();
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    Ok(Closedness {
        ratio: max_gap / perimeter,
        fixed_point: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn periodic_family_examples() {
        let one = PeriodicSeed::new(1.0).unwrap();
        assert_eq!(periodic_orbit(&one, 0.0), ReducedState::new(FRAC_PI_2, 1.0, 0.0, 0.0));
        let s = periodic_orbit(&one, TAU);
        assert_abs_diff_eq!(s.alpha, FRAC_PI_2 + TAU, epsilon = 1e-15);
        assert_abs_diff_eq!(s.k, 0.0, epsilon = 1e-15);
        let two = PeriodicSeed::new(2.0).unwrap();
        let s = periodic_orbit(&two, PI / 4.0);
        assert_abs_diff_eq!(s.alpha, PI, epsilon = 1e-15);
        assert_abs_diff_eq!(s.k, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(two.period(), PI, epsilon = 1e-15);
        assert!(PeriodicSeed::new(0.0).is_err());
    }

    #[test]
    fn closed_form_solves_reduced_system() {
        // derivative of the closed form against the vector field
        let seed = PeriodicSeed::new(-0.7).unwrap();
        for t in [0.0, 0.3, 2.0, 5.5] {
            let h = 1e-6;
            let a = periodic_orbit(&seed, t + h).to_array();
            let b = periodic_orbit(&seed, t - h).to_array();
            let f = reduced_rhs(&periodic_orbit(&seed, t).to_array());
            for i in 0..4 {
                assert_abs_diff_eq!((a[i] - b[i]) / (2.0 * h), f[i], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn fixed_points_of_the_map() {
        let cfg = IntegratorConfig::default();
        for h30 in [1.0, 2.0] {
            let p = poincare_map(&SectionPoint::new(FRAC_PI_2, h30, 0.0), CrossingDirection::Rising, &cfg).unwrap();
            assert_abs_diff_eq!(p.alpha, FRAC_PI_2 + TAU, epsilon = 1e-6);
            assert_abs_diff_eq!(p.h3, h30, epsilon = 1e-6);
            assert_abs_diff_eq!(p.h4, 0.0, epsilon = 1e-6);
            assert_abs_diff_eq!(p.crossing_time, TAU / h30, epsilon = 1e-6);
        }
    }

    #[test]
    fn no_return_is_reported() {
        // α = 0, h3 = h4 = 0, k = 0 is an equilibrium of the momentum system
        let cfg = IntegratorConfig {
            max_step: 1.0,
            ..IntegratorConfig::default()
        };
        let err = poincare_map(&SectionPoint::new(0.0, 0.0, 0.0), CrossingDirection::Rising, &cfg).unwrap_err();
        assert!(matches!(err, Error::NoReturn { .. }));
        let err = orbit((0.0, 0.0, 0.0), 3, CrossingDirection::Rising, &cfg).unwrap_err();
        assert!(matches!(err, Error::NoReturn { iteration: 1, .. }));
    }

    #[test]
    fn single_iteration_orbit() {
        let o = orbit(
            (FRAC_PI_2, 1.0, 0.0),
            1,
            CrossingDirection::Rising,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(o.points.len(), 1);
        assert!(orbit(
            (FRAC_PI_2, 1.0, 0.0),
            0,
            CrossingDirection::Rising,
            &IntegratorConfig::default()
        )
        .is_err());
    }

    fn synthetic(points: Vec<[f64; 3]>) -> PoincareOrbit {
        PoincareOrbit {
            seed: ReducedState::default(),
            iterations: points.len(),
            points: points
                .into_iter()
                .enumerate()
                .map(|(i, p)| SectionPoint {
                    alpha: p[0],
                    h3: p[1],
                    h4: p[2],
                    crossing_time: i as f64,
                })
                .collect(),
        }
    }

    #[test]
    fn closedness_of_filled_and_sparse_circles() {
        // golden-angle rotation fills a tilted circle
        let golden = PI * (3.0 - 5.0_f64.sqrt());
        let filled = synthetic(
            (0..500)
                .map(|i| {
                    let t = i as f64 * golden;
                    [1.5 + 0.1 * t.cos(), 1.0 + 0.05 * t.sin(), 0.08 * t.sin()]
                })
                .collect(),
        );
        let c = orbit_closedness(&filled).unwrap();
        assert!(!c.fixed_point);
        assert!(c.ratio < 0.01, "ratio {}", c.ratio);

        // period-5 orbit: five clusters leave one-fifth gaps
        let clustered = synthetic(
            (0..500)
                .map(|i| {
                    let t = (i % 5) as f64 * TAU / 5.0;
                    [1.5 + 0.1 * t.cos(), 1.0 + 0.1 * t.sin(), 0.0]
                })
                .collect(),
        );
        let c = orbit_closedness(&clustered).unwrap();
        assert_abs_diff_eq!(c.ratio, 0.2, epsilon = 1e-9);
    }

    #[test]
    fn closedness_flags_fixed_points_and_short_orbits() {
        let fixed = synthetic(vec![[FRAC_PI_2, 1.0, 0.0]; 60]);
        assert_eq!(
            orbit_closedness(&fixed).unwrap(),
            Closedness {
                ratio: 0.0,
                fixed_point: true
            }
        );
        let short = synthetic(vec![[FRAC_PI_2, 1.0, 0.0]; 10]);
        assert!(orbit_closedness(&short).is_err());
    }
}
