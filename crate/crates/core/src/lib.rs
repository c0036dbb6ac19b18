//! A laboratory for mean frequencies of closed geodesics.
//!
//! The numeric half integrates the linearized geodesic flow along closed
//! geodesics with known curvature data (round spheres, coordinate
//! ellipses of ellipsoids), locates conjugate points, classifies the
//! Poincare return map, and estimates mean frequencies as conjugate
//! points per unit length, pinned by curvature sandwich bounds. A
//! perturbation toolkit drives one-sided curvature and length bump
//! families through the positive cone of the symplectic group.
//!
//! The symbolic half is the exact loop-homology algebra of spheres: the
//! graded ring presentations, the circle operator and bracket, round
//! critical-level tables, Fekete limits of the fundamental nonnilpotent
//! powers, and the degree-vs-level resonance report.
//!
//! ```
//! use meanfreq::frequency::mean_frequency;
//! use meanfreq::jacobi::CurvatureProfile;
//! use meanfreq::ring::{round_critical_table, CoefficientSpec};
//! use std::f64::consts::PI;
//!
//! // a great circle on the unit 2-sphere: one conjugate point per pi
//! let profile = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
//! let estimate = mean_frequency(&profile, 50).unwrap();
//! assert!((estimate.mean_frequency - 1.0 / PI).abs() < 1e-3);
//!
//! // the exact critical-level table of the round 3-sphere pins the
//! // resonance slope 2(n-1)/L with deviations bounded by n
//! let table = round_critical_table(3, 2.0 * PI, 500, CoefficientSpec::Integers).unwrap();
//! let report = table.resonance_report().unwrap();
//! assert!((report.alpha_bar - 2.0 / PI).abs() < 1e-12);
//! assert!(report.verdict);
//! ```

// Validation guards use `!(x > 0.0)` deliberately: the negation is what
// rejects NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod frequency;
pub mod jacobi;
pub mod linalg;
pub mod models;
pub mod numeric;
pub mod ode;
pub mod report;
pub mod ring;
pub mod symplectic;

pub use error::{Error, Result};
