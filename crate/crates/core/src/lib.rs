//! Complex geometrical optics (CGO) machinery for the two-dimensional
//! Schrödinger equation `(Δ + q)u = 0` on the unit disk with partial
//! boundary data.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`]: arcs, the disk domain, polar quadrature grids, the Möbius chart
//!   and the triangulation used by the finite-element solver.
//! * [`calculus`]: Wirtinger derivatives, the area Cauchy transforms and the
//!   oscillatory operators `R_τ`, `R̃_τ`.
//! * [`phase`]: holomorphic Carleman phases with a prescribed interior critical
//!   point, and amplitudes.
//! * [`cgo`]: assembly of the CGO solutions and their residuals.
//! * [`fem`]: P1 Neumann solver and Neumann-to-Dirichlet matrices.
//! * [`recovery`]: pairings, the stationary-phase predictor and the pointwise
//!   estimator.
//! * [`carleman`]: empirical sampling of the weighted Carleman inequalities.

pub mod calculus;
pub mod carleman;
pub mod cgo;
pub mod domain;
mod error;
pub mod fem;
pub mod linalg;
pub mod phase;
pub mod quadrature;
pub mod recovery;
pub mod series;

pub use num_complex::Complex64 as C64;

pub use calculus::{GridFunction, OscillatoryWeight};
pub use cgo::{BoundaryCorrections, CgoSolution, MomentConstants, ResidualRecord};
pub use domain::{BoundaryArc, BoundaryGrid, Domain, HalfPlaneChart, Mesh, PolarGrid};
pub use error::{Error, Result};
pub use fem::{BoundaryBasis, FieldSolution, NdMap, Potential, Profile};
pub use phase::{Amplitude, PhaseOptions, PhaseReport, PhaseSpec};
pub use recovery::ProbeResult;
pub use series::PowerSeries;

/// Imaginary unit.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };
