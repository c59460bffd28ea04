//! State space M = R² × SO(2) × R, its frame vector fields and the planar
//! motions acting on it.
//!
//! The horizontal distribution is spanned by
//!
//! ```text
//! X1 = (cos θ, sin θ, k, 0)      X2 = (0, 0, 0, 1)
//! ```
//!
//! and the brackets `X3 = [X1, X2]`, `X4 = [X1, X3]` complete a global frame
//! with determinant identically one.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Singular values at or below this are treated as zero in rank checks.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// Base step of the central-difference bracket, scaled by `1 + |q|`.
pub const BRACKET_FD_STEP: f64 = 1e-5;

/// Reduces an angle to `[-π, π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    (angle + PI).rem_euclid(TAU) - PI
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle_positive(angle: f64) -> f64 {
    angle.rem_euclid(TAU)
}

/// Signed distance on the circle from `to` to `from`, in `[-π, π)`.
///
/// Zero exactly when the two angles agree modulo 2π.
pub fn angular_distance(from: f64, to: f64) -> f64 {
    wrap_angle(from - to)
}

/// A point `(x, y, θ, k)` of M: planar position, orientation, curvature.
///
/// `theta` is kept unwrapped so that integrated curves stay continuous.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfigurationPoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub k: f64,
}

impl ConfigurationPoint {
    pub const ORIGIN: Self = Self {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
        k: 0.0,
    };

    pub const fn new(x: f64, y: f64, theta: f64, k: f64) -> Self {
        Self { x, y, theta, k }
    }

    pub fn try_new(x: f64, y: f64, theta: f64, k: f64) -> Result<Self> {
        let q = Self::new(x, y, theta, k);
        if q.is_finite() {
            Ok(q)
        } else {
            Err(domain("configuration components must be finite"))
        }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.theta, self.k]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Euclidean norm of the raw coordinates.
    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Componentwise difference `self − other` with the angle compared on the
    /// circle.
    pub fn difference(&self, other: &Self) -> [f64; 4] {
        [
            self.x - other.x,
            self.y - other.y,
            angular_distance(self.theta, other.theta),
            self.k - other.k,
        ]
    }

    /// Euclidean distance in `(x, y, θ, k)` with θ taken modulo 2π.
    pub fn distance(&self, other: &Self) -> f64 {
        self.difference(other).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest componentwise deviation, θ modulo 2π.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.difference(other).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn offset(&self, v: &TangentVector, scale: f64) -> Self {
        Self::new(
            self.x + scale * v.dx,
            self.y + scale * v.dy,
            self.theta + scale * v.dtheta,
            self.k + scale * v.dk,
        )
    }
}

/// A vector of `T_q M` in the coordinate basis `(∂x, ∂y, ∂θ, ∂k)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TangentVector {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
    pub dk: f64,
}

impl TangentVector {
    pub const ZERO: Self = Self {
        dx: 0.0,
        dy: 0.0,
        dtheta: 0.0,
        dk: 0.0,
    };

    pub const fn new(dx: f64, dy: f64, dtheta: f64, dk: f64) -> Self {
        Self { dx, dy, dtheta, dk }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.dx, self.dy, self.dtheta, self.dk]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    fn sub(self, other: Self) -> Self {
        Self::new(
            self.dx - other.dx,
            self.dy - other.dy,
            self.dtheta - other.dtheta,
            self.dk - other.dk,
        )
    }

    fn scale(self, s: f64) -> Self {
        Self::new(self.dx * s, self.dy * s, self.dtheta * s, self.dk * s)
    }
}

/// Rigid motion of the plane: rotate by `phi`, then translate by `(tx, ty)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarMotion {
    pub tx: f64,
    pub ty: f64,
    pub phi: f64,
}

impl PlanarMotion {
    pub const IDENTITY: Self = Self {
        tx: 0.0,
        ty: 0.0,
        phi: 0.0,
    };

    pub const fn new(tx: f64, ty: f64, phi: f64) -> Self {
        Self { tx, ty, phi }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &PlanarMotion) -> PlanarMotion {
        let (s, c) = self.phi.sin_cos();
        PlanarMotion {
            tx: c * first.tx - s * first.ty + self.tx,
            ty: s * first.tx + c * first.ty + self.ty,
            phi: self.phi + first.phi,
        }
    }

    pub fn inverse(&self) -> PlanarMotion {
        let (s, c) = self.phi.sin_cos();
        PlanarMotion {
            tx: -(c * self.tx + s * self.ty),
            ty: -(-s * self.tx + c * self.ty),
            phi: -self.phi,
        }
    }

    pub fn act(&self, q: &ConfigurationPoint) -> ConfigurationPoint {
        act(self, q)
    }
}

/// Left action of SE(2) on M. Curvature is invariant.
pub fn act(g: &PlanarMotion, q: &ConfigurationPoint) -> ConfigurationPoint {
    let (s, c) = g.phi.sin_cos();
    ConfigurationPoint {
        x: c * q.x - s * q.y + g.tx,
        y: s * q.x + c * q.y + g.ty,
        theta: q.theta + g.phi,
        k: q.k,
    }
}

/// Controls `(u1, u2)`: speed along the contour and rate of change of
/// curvature.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlPair {
    pub u1: f64,
    pub u2: f64,
}

impl ControlPair {
    pub const fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn norm(&self) -> f64 {
        self.u1.hypot(self.u2)
    }

    /// Arclength (natural) parameterization: `u1² + u2² = 1`.
    pub fn is_natural(&self, tol: f64) -> bool {
        (self.u1 * self.u1 + self.u2 * self.u2 - 1.0).abs() <= tol
    }

    /// Velocity `u1 X1 + u2 X2` at `q`.
    pub fn velocity(&self, q: &ConfigurationPoint) -> TangentVector {
        let (s, c) = q.theta.sin_cos();
        TangentVector::new(self.u1 * c, self.u1 * s, self.u1 * q.k, self.u2)
    }
}

/// One of the four frame fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    X1,
    X2,
    X3,
    X4,
}

impl Frame {
    pub const ALL: [Frame; 4] = [Frame::X1, Frame::X2, Frame::X3, Frame::X4];

    pub fn from_index(index: usize) -> Result<Frame> {
        match index {
            1 => Ok(Frame::X1),
            2 => Ok(Frame::X2),
            3 => Ok(Frame::X3),
            4 => Ok(Frame::X4),
            _ => Err(domain(format!("frame index {index} is not in 1..=4"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Frame::X1 => 1,
            Frame::X2 => 2,
            Frame::X3 => 3,
            Frame::X4 => 4,
        }
    }

    pub fn eval(self, q: &ConfigurationPoint) -> TangentVector {
        let (s, c) = q.theta.sin_cos();
        match self {
            Frame::X1 => TangentVector::new(c, s, q.k, 0.0),
            Frame::X2 => TangentVector::new(0.0, 0.0, 0.0, 1.0),
            Frame::X3 => TangentVector::new(0.0, 0.0, -1.0, 0.0),
            Frame::X4 => TangentVector::new(-s, c, 0.0, 0.0),
        }
    }
}

/// `X_index(q)` for `index ∈ 1..=4`.
pub fn frame_field(index: usize, q: &ConfigurationPoint) -> Result<TangentVector> {
    Ok(Frame::from_index(index)?.eval(q))
}

/// Closed-form brackets of frame fields, `[f, g] = Dg·f − Df·g`.
fn frame_bracket(f: Frame, g: Frame, q: &ConfigurationPoint) -> TangentVector {
    use Frame::*;
    let (s, c) = q.theta.sin_cos();
    let (lo, hi, sign) = if f.index() <= g.index() {
        (f, g, 1.0)
    } else {
        (g, f, -1.0)
    };
    let v = match (lo, hi) {
        (X1, X2) => TangentVector::new(0.0, 0.0, -1.0, 0.0),
        (X1, X3) => TangentVector::new(-s, c, 0.0, 0.0),
        (X1, X4) => TangentVector::new(-q.k * c, -q.k * s, 0.0, 0.0),
        (X3, X4) => TangentVector::new(c, s, 0.0, 0.0),
        _ => TangentVector::ZERO,
    };
    v.scale(sign)
}

/// A smooth vector field on M built from the frame by iterated brackets.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorField {
    Frame(Frame),
    Bracket(Box<VectorField>, Box<VectorField>),
}

impl VectorField {
    pub fn bracket(f: VectorField, g: VectorField) -> VectorField {
        VectorField::Bracket(Box::new(f), Box::new(g))
    }

    pub fn eval(&self, q: &ConfigurationPoint) -> TangentVector {
        match self {
            VectorField::Frame(f) => f.eval(q),
            VectorField::Bracket(f, g) => match (f.as_ref(), g.as_ref()) {
                (VectorField::Frame(a), VectorField::Frame(b)) => frame_bracket(*a, *b, q),
                _ => finite_difference_bracket(f, g, q),
            },
        }
    }
}

impl From<Frame> for VectorField {
    fn from(f: Frame) -> Self {
        VectorField::Frame(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketMethod {
    /// Hard-coded closed forms; defined for pairs of frame fields only.
    Symbolic,
    /// Central differences of directional derivatives.
    FiniteDifference,
}

/// Directional derivative `Dv(q)·dir` by central differences.
fn directional_derivative(field: &VectorField, q: &ConfigurationPoint, dir: &TangentVector) -> TangentVector {
    let h = BRACKET_FD_STEP * (1.0 + q.norm());
    let plus = field.eval(&q.offset(dir, h));
    let minus = field.eval(&q.offset(dir, -h));
    plus.sub(minus).scale(0.5 / h)
}

fn finite_difference_bracket(f: &VectorField, g: &VectorField, q: &ConfigurationPoint) -> TangentVector {
    let fv = f.eval(q);
    let gv = g.eval(q);
    directional_derivative(g, q, &fv).sub(directional_derivative(f, q, &gv))
}

/// `[f, g](q)` with the convention `[f, g] = Dg·f − Df·g`, so that
/// `[X1, X2] = X3` and `[X1, X3] = X4`.
pub fn lie_bracket(
    f: &VectorField,
    g: &VectorField,
    q: &ConfigurationPoint,
    method: BracketMethod,
) -> Result<TangentVector> {
    match method {
        BracketMethod::Symbolic => match (f, g) {
            (VectorField::Frame(a), VectorField::Frame(b)) => Ok(frame_bracket(*a, *b, q)),
            _ => Err(domain("closed-form brackets exist only for pairs of frame fields")),
        },
        BracketMethod::FiniteDifference => Ok(finite_difference_bracket(f, g, q)),
    }
}

fn frame_matrix(q: &ConfigurationPoint) -> Matrix4<f64> {
    let cols: Vec<Vector4<f64>> = Frame::ALL.iter().map(|f| Vector4::from(f.eval(q).to_array())).collect();
    Matrix4::from_columns(&cols)
}

/// Determinant of the matrix with columns `X1..X4` at `q`; identically one.
pub fn frame_determinant(q: &ConfigurationPoint) -> f64 {
    frame_matrix(q).determinant()
}

/// Numerical rank of the given vectors stacked as columns.
pub fn numerical_rank(vectors: &[TangentVector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(4, vectors.len(), |i, j| vectors[j].to_array()[i]);
    m.singular_values().iter().filter(|s| **s > RANK_THRESHOLD).count()
}

/// Ranks of `span(X1, X2)`, `span(X1..X3)`, `span(X1..X4)` at `q`.
///
/// The distribution is of Engel type, so this is `(2, 3, 4)` everywhere.
pub fn growth_vector_check(q: &ConfigurationPoint) -> (usize, usize, usize) {
    let cols: Vec<TangentVector> = Frame::ALL.iter().map(|f| f.eval(q)).collect();
    (
        numerical_rank(&cols[..2]),
        numerical_rank(&cols[..3]),
        numerical_rank(&cols[..4]),
    )
}
