//! Sampled normal extremals and first-integral bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::extremal::{hamiltonian, linear_integrals, normal_rhs_h, normal_rhs_natural, ExtremalState, HState};
use crate::geometry::{act, PlanarMotion};
use crate::ode::{integrate, DenseSolution, IntegratorConfig, WithAngles};

/// Values of the closed-form first integrals `(H, a, b)` at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegralSample {
    pub h: f64,
    pub a: f64,
    pub b: f64,
}

impl IntegralSample {
    pub fn of(state: &HState) -> Self {
        let (a, b) = linear_integrals(state);
        Self {
            h: hamiltonian(&state.h),
            a,
            b,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.h.abs().max(self.a.abs()).max(self.b.abs())
    }
}

/// Largest deviation of each integral from its initial value.
pub fn max_drift(samples: &[IntegralSample]) -> IntegralSample {
    let Some(first) = samples.first() else {
        return IntegralSample::default();
    };
    samples.iter().fold(IntegralSample::default(), |m, s| IntegralSample {
        h: m.h.max((s.h - first.h).abs()),
        a: m.a.max((s.a - first.a).abs()),
        b: m.b.max((s.b - first.b).abs()),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Interpolant {
    /// Dense output of the integrator, mapped through a planar motion.
    Dense(DenseSolution<7>, PlanarMotion),
    /// Piecewise-linear between samples.
    Linear,
}

/// A time-sampled extremal on the level `H = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ExtremalState>,
    pub diagnostics: Vec<IntegralSample>,
    interpolant: Interpolant,
}

impl Trajectory {
    fn from_dense(sol: DenseSolution<7>) -> Self {
        let states: Vec<ExtremalState> = sol.states.iter().map(|s| ExtremalState::from_array(*s)).collect();
        Self {
            times: sol.times.clone(),
            diagnostics: diagnostics_of(&states),
            states,
            interpolant: Interpolant::Dense(sol, PlanarMotion::IDENTITY),
        }
    }

    /// Builds a trajectory from samples; evaluation between samples is
    /// linear.
    pub fn from_samples(times: Vec<f64>, states: Vec<ExtremalState>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(domain("trajectory needs matching, non-empty times and states"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("trajectory times must be strictly increasing"));
        }
        if states.iter().any(|s| !s.is_finite()) {
            return Err(domain("trajectory states must be finite"));
        }
        Ok(Self {
            diagnostics: diagnostics_of(&states),
            times,
            states,
            interpolant: Interpolant::Linear,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    pub fn initial_state(&self) -> ExtremalState {
        self.states[0]
    }

    pub fn final_state(&self) -> ExtremalState {
        *self.states.last().expect("non-empty trajectory")
    }

    /// State at time `t` within the sampled span.
    pub fn sample(&self, t: f64) -> Option<ExtremalState> {
        match &self.interpolant {
            Interpolant::Dense(sol, g) => sol.eval(t).map(|s| {
                let mut state = ExtremalState::from_array(s);
                state.q = act(g, &state.q);
                state
            }),
            Interpolant::Linear => {
                if !(t >= self.t_start() && t <= self.t_end()) {
                    return None;
                }
                let i = self.times.partition_point(|&ti| ti <= t);
                if i == 0 {
                    return Some(self.states[0]);
                }
                if i >= self.times.len() {
                    return Some(self.final_state());
                }
                let (t0, t1) = (self.times[i - 1], self.times[i]);
                let w = (t - t0) / (t1 - t0);
                let a = self.states[i - 1].to_array();
                let b = self.states[i].to_array();
                Some(ExtremalState::from_array(std::array::from_fn(|j| {
                    a[j] + w * (b[j] - a[j])
                })))
            }
        }
    }

    /// `n ≥ 2` states on a uniform time grid spanning the trajectory.
    pub fn uniform_samples(&self, n: usize) -> Vec<(f64, ExtremalState)> {
        let n = n.max(2);
        let (t0, t1) = (self.t_start(), self.t_end());
        (0..n)
            .map(|i| {
                let t = if i + 1 == n {
                    t1
                } else {
                    t0 + (t1 - t0) * i as f64 / (n - 1) as f64
                };
                (t, self.sample(t).expect("grid inside span"))
            })
            .collect()
    }

    /// Image of the trajectory under a planar motion; momenta are frame
    /// quantities and stay put.
    pub fn transformed(&self, g: &PlanarMotion) -> Trajectory {
        let states: Vec<ExtremalState> = self
            .states
            .iter()
            .map(|s| ExtremalState { q: act(g, &s.q), ..*s })
            .collect();
        let interpolant = match &self.interpolant {
            Interpolant::Dense(sol, inner) => Interpolant::Dense(sol.clone(), g.compose(inner)),
            Interpolant::Linear => Interpolant::Linear,
        };
        Trajectory {
            times: self.times.clone(),
            diagnostics: diagnostics_of(&states),
            states,
            interpolant,
        }
    }

    pub fn max_drift(&self) -> IntegralSample {
        max_drift(&self.diagnostics)
    }
}

fn diagnostics_of(states: &[ExtremalState]) -> Vec<IntegralSample> {
    states.iter().map(|s| IntegralSample::of(&s.to_h_state())).collect()
}

/// Natural-parameterization vector field with `θ` and `α` flagged as angles.
pub fn natural_system() -> WithAngles<7, impl Fn(f64, &[f64; 7]) -> [f64; 7]> {
    WithAngles::new(|_: f64, s: &[f64; 7]| normal_rhs_natural(s), &[2, 4])
}

/// Naturally parameterized normal extremal from `s0` over `[0, duration]`.
pub fn integrate_natural(s0: &ExtremalState, duration: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let sol = integrate(&natural_system(), s0.to_array(), (0.0, duration), cfg)?;
    Ok(Trajectory::from_dense(sol))
}

/// Normal extremal in frame momenta (any level of `H`) over `[0, duration]`.
pub fn integrate_h_form(s0: &HState, duration: f64, cfg: &IntegratorConfig) -> Result<DenseSolution<8>> {
    let system = WithAngles::new(|_: f64, s: &[f64; 8]| normal_rhs_h(s), &[2]);
    integrate(&system, s0.to_array(), (0.0, duration), cfg)
}

/// First-integral samples at every accepted step of an h-form solution.
pub fn h_form_diagnostics(sol: &DenseSolution<8>) -> Vec<IntegralSample> {
    sol.states
        .iter()
        .map(|s| IntegralSample::of(&HState::from_array(*s)))
        .collect()
}
