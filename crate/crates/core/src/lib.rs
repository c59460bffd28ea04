//! Sub-Riemannian geodesics on M = R² × SO(2) × R, the space of planar
//! positions, orientations and curvatures.
//!
//! The crate covers the full chain from geometry to contour completion:
//!
//! - [`geometry`]: frame fields, Lie brackets, the SE(2) action and the
//!   Engel-type rank conditions.
//! - [`extremal`]: Pontryagin extremals, coordinate changes between the
//!   canonical covector and frame momenta, first integrals, abnormal curves
//!   and cost functionals.
//! - [`ode`]: adaptive Dormand–Prince integration with dense output and
//!   event location.
//! - [`trajectory`]: time-sampled normal extremals with first-integral
//!   diagnostics.
//! - [`poincare`]: the periodic family, the section `k = 0` and the return
//!   map of the decoupled momentum system.
//! - [`bvp`]: multistart shooting that connects two configurations.
//! - [`io`]: CSV serialization and SVG rendering.

pub mod bvp;
pub mod error;
pub mod extremal;
pub mod geometry;
pub mod io;
pub mod ode;
pub mod poincare;
pub mod trajectory;

pub use error::{Error, Result};
pub use extremal::{
    AbnormalExtremal, CanonicalCovector, CurvatureSign, ExtremalClass, ExtremalState, FirstIntegral, HCoordinates,
    HState,
};
pub use geometry::{ConfigurationPoint, ControlPair, PlanarMotion, TangentVector};
pub use ode::{CrossingDirection, IntegratorConfig};
pub use trajectory::Trajectory;
