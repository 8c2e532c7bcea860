//! Charts, tensor fields, and the exact curvature tower.

mod bundle;
mod chart;
mod field;
pub mod ops;

pub use bundle::{Convention, CurvatureBundle, CurvatureError, CurvatureSign, LoweredSlotOrder};
pub use chart::ChartManifold;
pub use field::{indices, MultiIndexIter, TensorField};
