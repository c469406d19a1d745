//! Differential geometry of maps between pseudo-Riemannian manifolds.
//!
//! Expressions are parsed from text and differentiated symbolically; every
//! tensor is then evaluated pointwise in a single coordinate chart.

pub mod catalog;
pub mod conditions;
pub mod einstein;
pub mod error;
pub mod expr;
pub mod geometry;
mod linalg;
pub mod maps;
pub mod tensor;

pub use catalog::{CatalogEntry, Fact};
pub use error::{Error, Result};
pub use expr::Expression;
pub use geometry::{Chart, Coordinate, LocalGeometry, MetricField, TensorField, VectorField};
pub use maps::{MapJet, MapPoint, SmoothMap, TargetGeometry};
pub use tensor::{TensorValue, Variance};
