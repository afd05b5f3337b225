//! Two-dimensional material point method (MPM) coupled to spheropolygon
//! discrete elements (SDEM).
//!
//! Material points near a rigid spheropolygon are treated as small discs and
//! interact with it through the same vertex–edge contact law the rigid bodies
//! use among themselves. The resulting forces enter the MPM grid as an extra
//! nodal force and act on the rigid bodies at the exact contact points.
//!
//! Module map:
//! - [`grid`]: background grid, GIMP and B-spline weighting functions.
//! - [`constitutive`]: Jaumann-rate linear elasticity and Drucker–Prager return mapping.
//! - [`mpm`]: material points, particle/grid transfers, the update-stress-first step.
//! - [`sdem`]: spheropolygons, vertex–edge contact, Verlet lists, rigid integration.
//! - [`coupling`]: identified material points, coupling forces, the coupled step.
//! - [`harness`]: scenario files, seeding, time series, snapshots, built-in scenarios.

pub mod constitutive;
pub mod coupling;
pub mod grid;
pub mod harness;
pub mod mpm;
pub mod sdem;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Scalar z-component of the 2D cross product `a × b`.
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// `ω ẑ × r` for a scalar angular velocity.
#[inline]
pub fn perp_scaled(omega: f64, r: &Vec2) -> Vec2 {
    Vec2::new(-omega * r.y, omega * r.x)
}
