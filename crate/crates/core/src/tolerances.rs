//! Numerical tolerances used by preconditions and verification suites.
//!
//! Preconditions reject inputs; verification tolerances bound the residual
//! of an identity that holds exactly in exact arithmetic.

/// Unit-quaternion precondition: `| |q| - 1 | <= TOL_UNIT`.
pub const TOL_UNIT: f64 = 1e-9;

/// Orthogonality of accepted rotation matrices: `max |QᵀQ - I| <= TOL_ORTH`.
pub const TOL_ORTH: f64 = 1e-9;

/// Antisymmetry required by `vee`.
pub const TOL_ANTISYMMETRY: f64 = 1e-12;

/// Tangency to `S³` for tangent vectors handed to the symplectic form,
/// relative to `max(1, |u_q|)`.
pub const TOL_TANGENT: f64 = 1e-9;

/// Quaternion algebra identities.
pub const ALGEBRA: f64 = 1e-13;

/// Rotation homomorphism and double-cover identities.
pub const ROTATION: f64 = 1e-13;

/// Matrix → quaternion round trips.
pub const ROUNDTRIP: f64 = 1e-12;

/// Hat/vee identities.
pub const HAT_VEE: f64 = 1e-14;

/// Maurer–Cartan residual at `h = 1e-4`.
pub const MAURER_CARTAN: f64 = 1e-7;

/// Expected ratio `r(2h) / r(h)` for a second-order scheme, with its slack.
pub const MAURER_CARTAN_RATIO: f64 = 4.0;
pub const MAURER_CARTAN_RATIO_SLACK: f64 = 0.5;

/// Jacobi identity cyclic sum.
pub const JACOBI: f64 = 1e-12;

/// Lower bound the Jacobi residual of a corrupted tensor must exceed.
pub const JACOBI_NEGATIVE_CONTROL: f64 = 0.1;

/// Brackets computed through the structure tensor against closed forms.
pub const BRACKET: f64 = 1e-11;

/// Leibniz rule.
pub const LEIBNIZ: f64 = 1e-10;

/// Symplectic form against Poisson bracket, and other field identities.
pub const DUALITY: f64 = 1e-9;

/// Equations of motion against `J∇H`.
pub const DYNAMICS_ORACLE: f64 = 1e-9;

/// Analytic gradients against central finite differences (relative).
pub const GRADIENT_FD: f64 = 1e-6;
