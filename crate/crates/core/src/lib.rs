//! Planar convex bodies through their support functions.
//!
//! Shapes are normalized to class 𝒜 (perimeter 2π, Steiner point at the
//! origin). The crate reconstructs support functions from curvature
//! measures, finds the convex set farthest from a given body in the
//! Hausdorff and L² metrics, and maximizes quadratic functionals
//! `J(K) = ∫ a h² + b h'² + c h + d h'` over the class.

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod farthest;
pub mod functional;
pub mod grid;
pub mod json;
pub mod measure;
pub mod optimize;
pub mod quadrature;
pub mod random;
pub mod support;
pub mod weingarten;

pub use error::{GeomError, Result};
pub use grid::AngleGrid;
pub use measure::{Atom, CurvatureMeasure};
pub use support::{FourierSeries, GridSamples, Polygon, SupportFn};
pub use weingarten::TriangleSpec;
