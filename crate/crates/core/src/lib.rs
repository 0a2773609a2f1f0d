//! Exact height distributions and expected numbers of local maxima of
//! smooth isotropic Gaussian random fields on ℝᴺ and on the sphere Sᴺ,
//! N = 1, 2, 3, together with two independent numerical oracles: direct
//! quadrature of the GOE eigenvalue density and Monte Carlo simulation of
//! fields on periodic grids.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod euclid;
pub mod goe;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod special;
pub mod sphere;

pub use curve::{sweep, CurveKind, CurveTable};
pub use error::{Error, Result};
pub use euclid::{EuclideanDensity, EuclideanModel};
pub use goe::{Extreme, GoeQuery};
pub use model::{Geometry, HeightDensity, PeakModel, Validity};
pub use quad::{Estimate, Quadrature};
pub use special::Cov2;
pub use sphere::{SphereDensity, SphereModel};
