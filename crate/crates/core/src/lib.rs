//! Geometrically exact 6-parameter plate model on a rectangular reference domain.
//!
//! The plate is described by a deformation `y: ω → ℝ³` and a rotation field
//! `Q: ω → SO(3)`, discretized at the nodes of a tensor-product grid. Strains
//! `E = Qᵀ∇y − (e1|e2)` and bending (curvature) `K = Qᵀ axl(Q,α Qᵀ)` live at
//! cell centers.

pub mod constitutive;
pub mod functional;
pub mod io;
pub mod grid;
pub mod kinematics;
pub mod so3;
pub mod solver;

pub use constitutive::{EnergySplit, Material};
pub use grid::{Configuration, Edge, EdgeKind, PlateGrid};
pub use kinematics::{CurvatureThirdOrder, SurfaceTensor};
pub use so3::{Mat3, Rotation, Vec3};
