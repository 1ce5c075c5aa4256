//! Numeric tolerances, one per class of computation.
//!
//! Every floating-point check in the crate is tagged with the class of the
//! computation that produced it, and each class has a single tolerance:
//!
//! | class            | tolerance | produced by                                  |
//! |------------------|-----------|----------------------------------------------|
//! | exact            | 0         | ring arithmetic in ℚ\[σ\]                   |
//! | algebraic        | 1e-10     | float frames from exact coefficients         |
//! | linear solve     | 1e-9      | Gram solves, shape operators, projections    |
//! | finite difference| 2e-5      | central differences of frame fields          |
//!
//! Checks never borrow a looser tolerance from another class.

/// Algebraic float class: quantities computed from exact coefficients by a
/// bounded number of +, *, sqrt operations.
pub const ALGEBRAIC: f64 = 1e-10;

/// Linear-solve class: quantities that pass through a Gram-matrix solve.
pub const LINEAR_SOLVE: f64 = 1e-9;

/// Finite-difference class: central differences with step [`FD_STEP`],
/// guarded by a step-halving convergence check.
pub const FINITE_DIFF: f64 = 2e-5;

/// Central finite-difference step for derivative fields.
pub const FD_STEP: f64 = 1e-5;

/// Slant-angle constancy threshold, in radians. Angles come from exact
/// coefficient frames, so this sits in the algebraic class.
pub const ANGLE_TOL: f64 = 1e-7;

/// Threshold on |X(ln f)| below which a warping function counts as constant.
pub const CONST_WARP: f64 = 1e-8;

/// Minimum admissible singular value of an immersion Jacobian; below this the
/// immersion is treated as degenerate at the point.
pub const RANK_MIN: f64 = 1e-8;

/// Orthonormal-frame quality bound: Gram residuals of Q_tan and Q_nor and the
/// cross block Q_tanᵀ Q_nor must stay under this.
pub const FRAME_ORTHO: f64 = 1e-10;
