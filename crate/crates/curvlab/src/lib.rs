//! curvlab: a symbolic-numeric curvature laboratory for chart-defined
//! pseudo-Riemannian metrics.
//!
//! The crate takes a metric given component-by-component as exact symbolic
//! expressions on a single coordinate chart and builds the full local
//! curvature tower (Christoffel symbols, Riemann, Ricci, scalar and
//! sectional curvature, covariant derivatives), the classical derived
//! tensors (conformal, conharmonic, concircular, and a projective-type
//! tensor with matter coupling), structure detection for mixed super
//! quasi-Einstein metrics, Ricci-Bourguignon soliton classification, and a
//! curvature-identity audit. Everything is exact rational arithmetic where
//! possible; `exp` atoms demote to floating point only at evaluation.

pub mod check;
pub mod derived;
pub mod detect;
pub mod expr;
pub mod fixtures;
pub mod identity;
pub mod linalg;
pub mod report;
pub mod rng;
pub mod sample;
pub mod soliton;
pub mod structure;
pub mod tensor;
