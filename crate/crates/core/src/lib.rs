//! Numerical laboratory for the curve diffusion flow of an open planar curve
//! whose endpoints sit on a line, meet it at a fixed contact angle, and carry
//! a no-flux condition.
//!
//! The crate is organized around six subsystems:
//!
//! - [`curve`]: discrete differential geometry of open planar curves
//!   (sampling, curvature, length, energy, enclosed area, reparametrization);
//! - [`flow`]: semi-implicit time integration of `V = -kappa_ss` with the
//!   contact-angle boundary conditions, plus blow-up monitoring;
//! - [`smoother`]: sixth-order parabolic smoothing used to generate reference
//!   curves, and convergence-rate probes;
//! - [`chart`]: curvilinear coordinates around a reference curve, admissibility
//!   constants, height-function extraction and the full reference-curve verdict;
//! - [`norms`]: temporally weighted Lebesgue / Sobolev / Slobodetskii norms of
//!   diagnostic time series;
//! - [`lab`]: orchestration of full experiments, including the
//!   reparametrize-translate-restart pipeline and output emission.

pub mod banded;
pub mod chart;
pub mod curve;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod io;
pub mod lab;
pub mod norms;
pub mod smoother;
pub mod spline;
pub mod svg;
pub mod vec2;

pub use error::Error;
pub use vec2::Vec2;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
