//! Harmonic analysis and Hölder estimates for the Laplacian on products of
//! two-dimensional cones `C_{β₁} × … × C_{βₙ} × ℝ^q`, `0 < β_a < 1`.
//!
//! * [`geometry`]: points, geodesic distance, dilations, developing maps and the
//!   good/bad scale classifier.
//! * [`spectrum`]: homogeneous harmonic modes, indicial roots, `μ` and `d*`, the
//!   subquadratic space `ℋ≤2` and the second-order operator family.
//! * [`analysis`]: scaled `L²` norms, Campanato constants, log–log decay fits and
//!   the monotonicity checks.
//! * [`solver`]: spectral and finite-difference Poisson solvers, and the
//!   scale-by-scale iteration behind the Hölder estimate.
//! * [`cli`]: the `cone-schauder` command-line front end.
//!
//! ```
//! use cone_schauder::geometry::ConeSpec;
//! use cone_schauder::spectrum::{d_star, mu};
//!
//! let spec = ConeSpec::new(vec![0.75], 1).unwrap();
//! assert!((mu(&spec) - 1.0 / 3.0).abs() < 1e-12);
//! assert!((d_star(&spec).unwrap() - 7.0 / 3.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod quadrature;
pub mod solver;
pub mod spectrum;

pub use error::{Error, Result};
