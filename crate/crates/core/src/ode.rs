//! Adaptive Dormand–Prince 5(4) integration with dense output and event
//! location.
//!
//! Steps are controlled by a proportional-integral controller on the
//! componentwise (max-norm) error estimate. Every accepted step keeps the
//! coefficients of the fourth-order continuous extension, so the solution can
//! be evaluated anywhere inside the integration span and section crossings can
//! be refined without re-integrating.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Bisection stops once the bracketing interval is this short.
pub const EVENT_TIME_TOL: f64 = 1e-12;

/// An event function below this magnitude over a whole step is treated as
/// identically zero on that step.
pub const EVENT_ZERO_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-12,
            max_step: 0.1,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(domain("rtol and atol must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(domain("max_step must be positive"));
        }
        if self.max_steps < 1 {
            return Err(domain("max_steps must be at least 1"));
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// Step-size controller.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Continuous extension over one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i]))))
    }
}

/// Accepted step endpoints together with the dense interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("solution has at least one sample")
    }

    pub fn final_state(&self) -> [f64; N] {
        *self.states.last().expect("solution has at least one sample")
    }

    /// Interpolated state at `t`, or `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return None;
        }
        if self.steps.is_empty() {
            return Some(self.states[0]);
        }
        let idx = self.times.partition_point(|&ti| ti <= t).clamp(1, self.steps.len()) - 1;
        Some(self.steps[idx].eval(t))
    }
}

/// Right-hand side of `y' = f(t, y)`.
///
/// Closures implement this directly. Components flagged as angles have their
/// relative tolerance measured against `min(|y|, π)`, so unwrapped angles that
/// grow over long runs keep a fixed absolute accuracy.
pub trait Rhs<const N: usize> {
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N];

    fn is_angle(&self, _component: usize) -> bool {
        false
    }
}

impl<const N: usize, F> Rhs<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

/// A right-hand side with some components marked as angles.
pub struct WithAngles<const N: usize, F> {
    pub rhs: F,
    pub angular: [bool; N],
}

impl<const N: usize, F> WithAngles<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, angle_components: &[usize]) -> Self {
        let mut angular = [false; N];
        for &i in angle_components {
            angular[i] = true;
        }
        Self { rhs, angular }
    }
}

impl<const N: usize, F> Rhs<N> for WithAngles<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        (self.rhs)(t, y)
    }

    fn is_angle(&self, component: usize) -> bool {
        self.angular[component]
    }
}

struct Stepper<'a, const N: usize, F> {
    rhs: &'a F,
    cfg: IntegratorConfig,
    angular: [bool; N],
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    fac_old: f64,
    rejected: bool,
    attempts: usize,
}

fn check_finite<const N: usize>(v: &[f64; N], t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

impl<'a, const N: usize, F> Stepper<'a, N, F>
where
    F: Rhs<N>,
{
    fn new(rhs: &'a F, t0: f64, y0: [f64; N], span: f64, cfg: IntegratorConfig) -> Result<Self> {
        check_finite(&y0, t0)?;
        let k1 = rhs.eval(t0, &y0);
        let angular = std::array::from_fn(|i| rhs.is_angle(i));
        check_finite(&k1, t0)?;
        let mut stepper = Self {
            rhs,
            cfg,
            angular,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            fac_old: 1e-4,
            rejected: false,
            attempts: 0,
        };
        stepper.h = stepper.initial_step(span)?;
        Ok(stepper)
    }

    fn scale(&self, i: usize, a: f64, b: f64) -> f64 {
        let mut magnitude = a.abs().max(b.abs());
        if self.angular[i] {
            magnitude = magnitude.min(PI);
        }
        self.cfg.atol + self.cfg.rtol * magnitude
    }

    fn initial_step(&self, span: f64) -> Result<f64> {
        let rms = |v: &[f64; N]| {
            (v.iter()
                .zip(&self.y)
                .enumerate()
                .map(|(i, (a, y))| {
                    let r = a / self.scale(i, *y, *y);
                    r * r
                })
                .sum::<f64>()
                / N as f64)
                .sqrt()
        };
        let d0 = rms(&self.y);
        let d1 = rms(&self.k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.cfg.max_step).min(span);
        let y1 = axpy(&self.y, h0, &[(1.0, &self.k1)]);
        let f1 = self.rhs.eval(self.t + h0, &y1);
        check_finite(&f1, self.t + h0)?;
        let diff: [f64; N] = std::array::from_fn(|i| f1[i] - self.k1[i]);
        let d2 = rms(&diff) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(self.cfg.max_step).min(span))
    }

    /// Advances one accepted step without passing `t_end`.
    fn step(&mut self, t_end: f64) -> Result<DenseStep<N>> {
        loop {
            if self.attempts >= self.cfg.max_steps {
                return Err(Error::StepBudget {
                    max_steps: self.cfg.max_steps,
                    t: self.t,
                });
            }
            self.attempts += 1;

            let remaining = t_end - self.t;
            let mut h = self.h.min(self.cfg.max_step);
            // avoid leaving a sliver of a final step
            if remaining - h <= 1e-8 * h {
                h = remaining;
            }
            if h <= f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t });
            }

            let t = self.t;
            let y = &self.y;
            let k1 = &self.k1;
            let f = |t: f64, y: &[f64; N]| self.rhs.eval(t, y);
            let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
            let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let y6 = axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            let k6 = f(t + h, &y6);
            let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            check_finite(&y_new, t + h)?;
            let k7 = f(t + h, &y_new);
            check_finite(&k7, t + h)?;

            let mut err = 0.0_f64;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err = err.max(e.abs() / self.scale(i, y[i], y_new[i]));
            }
            if !err.is_finite() {
                return Err(Error::NonFinite { t });
            }

            let fac11 = err.powf(EXPO);
            if err <= 1.0 {
                let fac = (fac11 / self.fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if self.rejected {
                    h_new = h_new.min(h);
                }
                self.fac_old = err.max(1e-4);
                self.rejected = false;

                let mut r1 = [0.0; N];
                let mut r2 = [0.0; N];
                let mut r3 = [0.0; N];
                let mut r4 = [0.0; N];
                let mut r5 = [0.0; N];
                for i in 0..N {
                    let diff = y_new[i] - y[i];
                    let bspl = h * k1[i] - diff;
                    r1[i] = y[i];
                    r2[i] = diff;
                    r3[i] = bspl;
                    r4[i] = diff - h * k7[i] - bspl;
                    r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                let dense = DenseStep {
                    t0: t,
                    h,
                    coeffs: [r1, r2, r3, r4, r5],
                };

                self.t = if h == remaining { t_end } else { t + h };
                self.y = y_new;
                self.k1 = k7;
                self.h = h_new;
                return Ok(dense);
            }
            self.h = h / (1.0 / FAC_MIN).min(fac11 / SAFETY);
            self.rejected = true;
        }
    }
}

fn check_span(t0: f64, t1: f64) -> Result<f64> {
    let span = t1 - t0;
    if !(span > 0.0) || !span.is_finite() {
        return Err(domain(format!("integration span ({t0}, {t1}) must be increasing")));
    }
    Ok(span)
}

/// Integrates `y' = rhs(t, y)` over `[t0, t1]`, keeping every accepted step.
pub fn integrate<const N: usize, F>(
    rhs: &F,
    y0: [f64; N],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<DenseSolution<N>>
where
    F: Rhs<N>,
{
    cfg.validate()?;
    let (t0, t1) = t_span;
    let span = check_span(t0, t1)?;
    let mut stepper = Stepper::new(rhs, t0, y0, span, *cfg)?;
    let mut sol = DenseSolution {
        times: vec![t0],
        states: vec![y0],
        steps: Vec::new(),
    };
    while stepper.t < t1 {
        let dense = stepper.step(t1)?;
        sol.steps.push(dense);
        sol.times.push(stepper.t);
        sol.states.push(stepper.y);
    }
    Ok(sol)
}

/// Like [`integrate`] but only returns the final state.
pub fn integrate_endpoint<const N: usize, F>(
    rhs: &F,
    y0: [f64; N],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<[f64; N]>
where
    F: Rhs<N>,
{
    cfg.validate()?;
    let (t0, t1) = t_span;
    let span = check_span(t0, t1)?;
    let mut stepper = Stepper::new(rhs, t0, y0, span, *cfg)?;
    while stepper.t < t1 {
        stepper.step(t1)?;
    }
    Ok(stepper.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingDirection {
    Rising,
    Falling,
    Any,
}

impl CrossingDirection {
    fn matches(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            CrossingDirection::Rising => rising,
            CrossingDirection::Falling => falling,
            CrossingDirection::Any => rising || falling,
        }
    }
}

/// A scalar event `g(t, y) = 0` with a crossing-direction filter.
pub struct EventSpec<G> {
    pub function: G,
    pub direction: CrossingDirection,
    pub guess_time: Option<f64>,
}

impl<G> EventSpec<G> {
    pub fn new(function: G, direction: CrossingDirection) -> Self {
        Self {
            function,
            direction,
            guess_time: None,
        }
    }

    pub fn with_guess(mut self, t: f64) -> Self {
        self.guess_time = Some(t);
        self
    }
}

/// Crossing inside one step, refined by bisection on the interpolant.
fn step_crossing<const N: usize, G>(
    step: &DenseStep<N>,
    y_start: &[f64; N],
    y_end: &[f64; N],
    ev: &EventSpec<G>,
) -> Option<(f64, [f64; N])>
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    let g = &ev.function;
    let (ta, tb) = (step.t0, step.t1());
    let ga = g(ta, y_start);
    let gb = g(tb, y_end);

    let flat = ga.abs() < EVENT_ZERO_TOL
        && gb.abs() < EVENT_ZERO_TOL
        && [0.25, 0.5, 0.75].iter().all(|s| {
            let t = ta + s * step.h;
            g(t, &step.eval(t)).abs() < EVENT_ZERO_TOL
        });
    if flat || !ev.direction.matches(ga, gb) {
        return None;
    }

    let (mut lo, mut hi) = (ta, tb);
    let (mut g_lo, mut g_hi) = (ga, gb);
    for _ in 0..200 {
        if hi - lo <= EVENT_TIME_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid, &step.eval(mid));
        if g_mid == 0.0 {
            return Some((mid, step.eval(mid)));
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    let t = if g_lo.abs() <= g_hi.abs() { lo } else { hi };
    let y = if t == tb {
        *y_end
    } else if t == ta {
        *y_start
    } else {
        step.eval(t)
    };
    Some((t, y))
}

/// All crossings of `ev` along `sol` in time order, except that the crossing
/// nearest to `ev.guess_time` (if given) is moved to the front.
pub fn locate_event<const N: usize, G>(sol: &DenseSolution<N>, ev: &EventSpec<G>) -> Vec<(f64, [f64; N])>
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    let mut hits: Vec<(f64, [f64; N])> = sol
        .steps
        .iter()
        .enumerate()
        .filter_map(|(i, step)| step_crossing(step, &sol.states[i], &sol.states[i + 1], ev))
        .collect();
    if let Some(guess) = ev.guess_time {
        if let Some(best) =
            (0..hits.len()).min_by(|&i, &j| (hits[i].0 - guess).abs().total_cmp(&(hits[j].0 - guess).abs()))
        {
            let first = hits.remove(best);
            hits.insert(0, first);
        }
    }
    hits
}

/// Integrates from `t0` until the first crossing of `ev`, or until `t_max`.
///
/// Returns the trajectory up to the stopping time together with the crossing,
/// if any.
pub fn integrate_until_event<const N: usize, F, G>(
    rhs: &F,
    y0: [f64; N],
    t0: f64,
    t_max: f64,
    cfg: &IntegratorConfig,
    ev: &EventSpec<G>,
) -> Result<(DenseSolution<N>, Option<(f64, [f64; N])>)>
where
    F: Rhs<N>,
    G: Fn(f64, &[f64; N]) -> f64,
{
    cfg.validate()?;
    let span = check_span(t0, t_max)?;
    let mut stepper = Stepper::new(rhs, t0, y0, span, *cfg)?;
    let mut sol = DenseSolution {
        times: vec![t0],
        states: vec![y0],
        steps: Vec::new(),
    };
    while stepper.t < t_max {
        let y_start = stepper.y;
        let dense = stepper.step(t_max)?;
        let hit = step_crossing(&dense, &y_start, &stepper.y, ev);
        sol.steps.push(dense);
        sol.times.push(stepper.t);
        sol.states.push(stepper.y);
        if hit.is_some() {
            return Ok((sol, hit));
        }
    }
    Ok((sol, None))
}
