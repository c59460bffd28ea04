//! Extremals of the maximum principle.
//!
//! Normal extremals (multiplier ν = −1) follow the Hamiltonian flow of
//! `H = (h1² + h2²)/2` where `hi = ⟨p, Xi⟩`. Abnormal extremals (ν = 0) are
//! available in closed form: in the reduced frame they only move the
//! curvature, `γ(t) = (0, 0, 0, k0 ± t)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{ConfigurationPoint, ControlPair};

/// Base step of the central differences behind [`poisson_bracket`], scaled
/// by `1 + |component|`.
pub const POISSON_FD_STEP: f64 = 1e-5;

/// Covector components `(a, b, c, d)` dual to `(x, y, θ, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CanonicalCovector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CanonicalCovector {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_trivial(&self) -> bool {
        self.to_array().iter().all(|v| *v == 0.0)
    }
}

/// Momenta along the frame, `hi = ⟨p, Xi⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HCoordinates {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
}

impl HCoordinates {
    pub const fn new(h1: f64, h2: f64, h3: f64, h4: f64) -> Self {
        Self { h1, h2, h3, h4 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.h1, self.h2, self.h3, self.h4]
    }

    /// Extremal controls of the normal case, `ui = hi`.
    pub fn controls(&self) -> ControlPair {
        ControlPair::new(self.h1, self.h2)
    }
}

/// `(a, b, c, d) ↦ (h1, h2, h3, h4)` at `q`.
pub fn to_h(p: &CanonicalCovector, q: &ConfigurationPoint) -> HCoordinates {
    let (s, c) = q.theta.sin_cos();
    HCoordinates {
        h1: p.a * c + p.b * s + p.c * q.k,
        h2: p.d,
        h3: -p.c,
        h4: -p.a * s + p.b * c,
    }
}

/// Inverse of [`to_h`].
pub fn from_h(h: &HCoordinates, q: &ConfigurationPoint) -> CanonicalCovector {
    let (s, c) = q.theta.sin_cos();
    let tangential = h.h1 + q.k * h.h3;
    CanonicalCovector {
        a: tangential * c - h.h4 * s,
        b: h.h4 * c + tangential * s,
        c: -h.h3,
        d: h.h2,
    }
}

/// Phase point of the normal flow in frame momenta, with arbitrary `H`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HState {
    pub q: ConfigurationPoint,
    pub h: HCoordinates,
}

impl HState {
    pub fn new(q: ConfigurationPoint, h: HCoordinates) -> Self {
        Self { q, h }
    }

    pub fn from_array(s: [f64; 8]) -> Self {
        Self {
            q: ConfigurationPoint::new(s[0], s[1], s[2], s[3]),
            h: HCoordinates::new(s[4], s[5], s[6], s[7]),
        }
    }

    pub fn to_array(self) -> [f64; 8] {
        let q = self.q;
        let h = self.h;
        [q.x, q.y, q.theta, q.k, h.h1, h.h2, h.h3, h.h4]
    }

    pub fn covector(&self) -> CanonicalCovector {
        from_h(&self.h, &self.q)
    }
}

/// Naturally parameterized normal phase point: `h1 = cos α`, `h2 = sin α`,
/// which pins the Hamiltonian to 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtremalState {
    pub q: ConfigurationPoint,
    pub alpha: f64,
    pub h3: f64,
    pub h4: f64,
}

impl ExtremalState {
    pub fn new(q: ConfigurationPoint, alpha: f64, h3: f64, h4: f64) -> Self {
        Self { q, alpha, h3, h4 }
    }

    pub fn from_array(s: [f64; 7]) -> Self {
        Self {
            q: ConfigurationPoint::new(s[0], s[1], s[2], s[3]),
            alpha: s[4],
            h3: s[5],
            h4: s[6],
        }
    }

    pub fn to_array(self) -> [f64; 7] {
        let q = self.q;
        [q.x, q.y, q.theta, q.k, self.alpha, self.h3, self.h4]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn h(&self) -> HCoordinates {
        let (s, c) = self.alpha.sin_cos();
        HCoordinates::new(c, s, self.h3, self.h4)
    }

    pub fn to_h_state(&self) -> HState {
        HState::new(self.q, self.h())
    }

    pub fn controls(&self) -> ControlPair {
        self.h().controls()
    }
}

/// PMP multiplier class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtremalClass {
    Normal,
    Abnormal,
}

impl ExtremalClass {
    /// The multiplier ν of the Pontryagin function.
    pub fn multiplier(self) -> f64 {
        match self {
            ExtremalClass::Normal => -1.0,
            ExtremalClass::Abnormal => 0.0,
        }
    }
}

impl std::fmt::Display for ExtremalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtremalClass::Normal => f.write_str("normal"),
            ExtremalClass::Abnormal => f.write_str("abnormal"),
        }
    }
}

/// Direction of curvature motion along an abnormal extremal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurvatureSign {
    Increasing,
    Decreasing,
}

impl CurvatureSign {
    pub fn value(self) -> f64 {
        match self {
            CurvatureSign::Increasing => 1.0,
            CurvatureSign::Decreasing => -1.0,
        }
    }

    pub fn of(delta: f64) -> Self {
        if delta < 0.0 {
            CurvatureSign::Decreasing
        } else {
            CurvatureSign::Increasing
        }
    }
}

/// Naturally parameterized abnormal extremal in the reduced frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbnormalExtremal {
    pub k0: f64,
    pub sign: CurvatureSign,
}

impl AbnormalExtremal {
    pub fn new(k0: f64, sign: CurvatureSign) -> Self {
        Self { k0, sign }
    }

    pub fn at(&self, t: f64) -> Result<ConfigurationPoint> {
        abnormal_trajectory(self, t)
    }
}

/// `γ(t) = (0, 0, 0, k0 ± t)`.
pub fn abnormal_trajectory(e: &AbnormalExtremal, t: f64) -> Result<ConfigurationPoint> {
    if !(t >= 0.0) {
        return Err(domain(format!("abnormal extremal time must be non-negative, got {t}")));
    }
    Ok(ConfigurationPoint::new(0.0, 0.0, 0.0, e.k0 + e.sign.value() * t))
}

/// Normal Hamiltonian vector field in `(x, y, θ, k, h1, h2, h3, h4)`.
pub fn normal_rhs_h(s: &[f64; 8]) -> [f64; 8] {
    let [_, _, theta, k, h1, h2, h3, h4] = *s;
    let (sn, cs) = theta.sin_cos();
    [
        h1 * cs,
        h1 * sn,
        h1 * k,
        h2,
        -h2 * h3,
        h1 * h3,
        h1 * h4,
        -k * h1 * (k * h3 + h1),
    ]
}

/// Normal Hamiltonian vector field on `H = 1/2` in
/// `(x, y, θ, k, α, h3, h4)`.
pub fn normal_rhs_natural(s: &[f64; 7]) -> [f64; 7] {
    let [_, _, theta, k, alpha, h3, h4] = *s;
    let (sn, cs) = theta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    [ca * cs, ca * sn, k * ca, sa, h3, h4 * ca, -k * ca * (k * h3 + ca)]
}

/// `H = (h1² + h2²)/2`.
pub fn hamiltonian(h: &HCoordinates) -> f64 {
    0.5 * (h.h1 * h.h1 + h.h2 * h.h2)
}

/// The first integrals `(a, b)` coming from translation invariance.
pub fn linear_integrals(s: &HState) -> (f64, f64) {
    let p = s.covector();
    (p.a, p.b)
}

/// First integrals known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FirstIntegral {
    Hamiltonian,
    A,
    B,
}

impl FirstIntegral {
    pub const ALL: [FirstIntegral; 3] = [FirstIntegral::Hamiltonian, FirstIntegral::A, FirstIntegral::B];

    /// Value on canonical coordinates `z = (x, y, θ, k, a, b, c, d)`.
    pub fn canonical(self, z: &[f64; 8]) -> f64 {
        match self {
            FirstIntegral::Hamiltonian => {
                let [_, _, theta, k, a, b, c, d] = *z;
                let h1 = a * theta.cos() + b * theta.sin() + c * k;
                0.5 * (h1 * h1 + d * d)
            }
            FirstIntegral::A => z[4],
            FirstIntegral::B => z[5],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FirstIntegral::Hamiltonian => "H",
            FirstIntegral::A => "a",
            FirstIntegral::B => "b",
        }
    }
}

fn canonical_point(s: &HState) -> [f64; 8] {
    let p = s.covector();
    let q = s.q;
    [q.x, q.y, q.theta, q.k, p.a, p.b, p.c, p.d]
}

fn partial(f: FirstIntegral, z: &[f64; 8], i: usize) -> f64 {
    let h = POISSON_FD_STEP * (1.0 + z[i].abs());
    let mut plus = *z;
    let mut minus = *z;
    plus[i] += h;
    minus[i] -= h;
    (f.canonical(&plus) - f.canonical(&minus)) / (2.0 * h)
}

/// Canonical Poisson bracket `{f, g} = Σ ∂f/∂qi ∂g/∂pi − ∂f/∂pi ∂g/∂qi`,
/// by central differences.
pub fn poisson_bracket(f: FirstIntegral, g: FirstIntegral, s: &HState) -> f64 {
    let z = canonical_point(s);
    (0..4)
        .map(|i| partial(f, &z, i) * partial(g, &z, i + 4) - partial(f, &z, i + 4) * partial(g, &z, i))
        .sum()
}

fn trapezoid(values: impl ExactSizeIterator<Item = f64>, dt: f64) -> Result<f64> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(domain(format!("sampling step must be positive, got {dt}")));
    }
    let n = values.len();
    if n == 0 {
        return Err(domain("control sequence is empty"));
    }
    let mut sum = 0.0;
    for (i, v) in values.enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        sum += w * v;
    }
    Ok(sum * dt)
}

/// Sub-Riemannian length `∫ √(u1² + u2²) dt` by the composite trapezoid rule.
pub fn cost_length(controls: &[ControlPair], dt: f64) -> Result<f64> {
    trapezoid(controls.iter().map(|u| u.norm()), dt)
}

/// Action `∫ (u1² + u2²)/2 dt` by the composite trapezoid rule.
pub fn cost_action(controls: &[ControlPair], dt: f64) -> Result<f64> {
    trapezoid(controls.iter().map(|u| 0.5 * (u.u1 * u.u1 + u.u2 * u.u2)), dt)
}
