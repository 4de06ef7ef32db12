//! Bernstein-Bezier spline collocation for second-order elliptic PDEs in
//! non-divergence form on triangulated polygonal domains.
//!
//! The pipeline is: [`mesh`] → [`bernstein::SplineSpace`] →
//! [`smoothness`] + [`assembly`] → [`solver`] → [`evaluation`]. The
//! [`pipeline`] module strings these together the same way the
//! `spline-colloc` binary does.

pub mod assembly;
pub mod bernstein;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod mesh;
pub mod pde;
pub mod pipeline;
pub mod smoothness;
pub mod solver;
pub mod sparse;
pub mod testlib;

pub use error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];
