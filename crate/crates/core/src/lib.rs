//! Reconstruction of a bordered complex curve `Q ⊂ CP²` from sampled boundary
//! data, together with Green-function and genus utilities for plane-curve models.
//!
//! The numerical core is generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix `f64`, which every tolerance in the
//! test-suite assumes.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these guards

pub mod error;
pub mod genus;
pub mod geometry;
pub mod green;
pub mod indicators;
pub mod infinity;
pub mod io;
pub mod linalg;
pub mod linsys;
pub mod oracles;
pub mod poly;
pub mod reconstruct;
pub mod scalar;
pub mod series;
pub mod shock;
pub mod symmetric;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Complex64 = num_complex::Complex<f64>;
pub type ProjPoint = geometry::ProjPoint<f64>;
pub type BoundaryData = geometry::BoundaryData<f64>;
pub type BoundaryLoop = geometry::BoundaryLoop<f64>;
pub type LineParam = geometry::LineParam<f64>;
pub type LaurentTable = indicators::LaurentTable<f64>;
pub type GermAtInfinity = infinity::GermAtInfinity<f64>;
pub type RationalAffinePoly = infinity::RationalAffinePoly<f64>;
pub type Poly = poly::Poly<f64>;
pub type BiSeries = series::BiSeries<f64>;
pub type HData = shock::HData<f64>;
pub type FiberResult = reconstruct::FiberResult<f64>;
pub type PointCloud = reconstruct::PointCloud<f64>;
pub type CurveModel = green::CurveModel<f64>;
pub type SurfaceModel = genus::SurfaceModel<f64>;
