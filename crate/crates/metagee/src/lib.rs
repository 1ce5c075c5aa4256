//! Metallic and Golden Riemannian submanifold geometry, verified numerically.
//!
//! A metallic structure on a Riemannian manifold is a (1,1)-tensor J with
//! J² = pJ + qI for positive integers p, q; the Golden structure is the case
//! p = q = 1. This crate builds the computational side of that theory for
//! immersed submanifolds of Euclidean space carrying a diagonal σ/σ̄ structure:
//!
//! - exact arithmetic in the quadratic ring ℚ\[σ\] with σ² = pσ + q ([`quadring`]),
//! - a small expression DSL with exact constants and second-order forward-mode
//!   differentiation ([`exprlang`]),
//! - ambient structures and their projection operators ([`ambient`]),
//! - per-point frames and the T/N/t/n decomposition of J on a submanifold
//!   ([`submanifold`]),
//! - Levi-Civita connection, second fundamental form, shape operators and the
//!   covariant derivatives of T, N, t, n ([`geometry`]),
//! - slant angles and submanifold classification ([`slant`]),
//! - warped product verification and the identity/obstruction catalog
//!   ([`warped`], [`identity`]),
//! - spec-file ingestion, builtin example fixtures, and report emission
//!   ([`report`]).
//!
//! Everything that can be checked exactly is checked in ring arithmetic;
//! everything else carries an explicit numeric class and tolerance (see
//! [`tol`]).

// Index-heavy numeric kernels read better with explicit loops.
#![allow(clippy::needless_range_loop)]

pub mod ambient;
pub mod exprlang;
pub mod geometry;
pub mod identity;
pub mod linalg;
pub mod quadring;
pub mod report;
pub mod slant;
pub mod submanifold;
pub mod tol;
pub mod warped;

pub use ambient::AmbientStructure;
pub use quadring::{MetallicParams, RingElem};
// report re-exports are added with the report module
pub use submanifold::{Decomposition, ImmersionSpec, PointFrame};
