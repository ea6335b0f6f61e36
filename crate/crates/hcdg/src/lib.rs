//! Nodal discontinuous Galerkin discretisations on interval and quadrilateral
//! meshes with closed (Gauss-Lobatto), open (Gauss-Legendre) and half-closed
//! (Gauss-Radau) node placements.
//!
//! The crate assembles the DG mass, divergence, gradient and LDG Laplacian
//! operators in sparse form, places half-closed nodes according to a per-face
//! switch function, and provides switch-driven static condensation, block
//! preconditioners and convergence-study drivers on top of them.

pub mod harness;
pub mod layout;
pub mod mesh;
pub mod operators;
pub mod quadrature;
pub mod solvers;
pub mod sparse;
pub mod switch;
