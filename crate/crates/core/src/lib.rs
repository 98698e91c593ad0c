//! Truncated Taylor jets over (z, z̄) and the Kähler geometry built on them:
//! Bergman kernels of the unit ball and its finite unitary quotients, metric,
//! Ricci curvature, the complex Monge–Ampère operator `J`, the Fefferman
//! recursion, and a finite-difference oracle for cross-checking.

pub mod error;
pub mod fd;
pub mod fefferman;
pub mod geometry;
pub mod groups;
pub mod harness;
pub mod jets;
pub mod kernels;

pub use error::{Error, Result};
pub use fd::FdConfig;
pub use groups::{FiniteUnitaryGroup, GroupSpec};
pub use jets::{det_jet, Direction, Jet};
pub use kernels::{Field, KernelSpec, KernelVariant, PointJets, ScalarField};
