//! Rigid-body mechanics in quaternion variables.
//!
//! The crate is organised bottom-up:
//!
//! * [`quaternion`]: quaternion algebra, the rotation operator and the
//!   right-action matrix.
//! * [`so3`]: the double cover `S³ → SO(3)` in both directions, hat/vee,
//!   adjoint operators and a Maurer–Cartan checker.
//! * [`poisson`]: structure tensors of the quaternionic Poisson brackets,
//!   bracket evaluation, Hamiltonian vector fields, Jacobi and Poisson-map
//!   verifiers and the canonical symplectic form on `T*S³`.
//! * [`dynamics`]: the rigid-body Hamiltonian, built-in potentials, the
//!   algebraic equations of motion in the mixed frame and an RK4 integrator
//!   with conservation monitors.
//! * [`verify`]: randomized verification suites shared by the CLI and the
//!   acceptance tests.

pub mod dynamics;
pub mod error;
pub mod poisson;
pub mod quaternion;
pub mod sampling;
pub mod so3;
pub mod tolerances;
pub mod verify;

pub use dynamics::{
    BodyParams, InertiaTensor, Monitor, PotentialSpec, RenormPolicy, Trajectory,
};
pub use error::{Error, Result};
pub use poisson::{Chart, DynamicVariable, Layout, PhasePoint, StructureTensor};
pub use quaternion::{Matrix4, Quaternion, Vec3};
pub use so3::{Matrix3, RotationMatrix, SkewMatrix3};
