//! Geometry of three-dimensional Sasakian subriemannian manifolds.
//!
//! The crate integrates the subriemannian geodesic flow, evaluates curvature
//! invariants of contact frames, solves the Jacobi/Riccati systems in closed
//! form and numerically, computes ball volumes on the three model spaces
//! (Heisenberg group, SU(2) and SL(2)), and checks the Bishop, Hessian,
//! sub-Laplacian and Cheeger–Yau type comparison inequalities.

pub mod acceptance;
pub mod distops;
pub mod frame;
pub mod geoflow;
pub mod heat;
pub mod models;
pub mod numerics;
pub mod report;
pub mod riccati;
pub mod volume;
