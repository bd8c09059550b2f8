//! Finite element eigenpairs of `-Δu + u = λu` (homogeneous Dirichlet data) on
//! triangulated polygons, together with a complementarity error estimator and
//! the eigenvalue/eigenfunction bounds built on top of it.
//!
//! The pipeline for one mesh is:
//!
//! 1. [`fem::make_space`] + [`fem::assemble_primal`] build the conforming
//!    Lagrange pencil, [`solvers::eig_smallest`] computes the eigenpairs;
//! 2. [`estimator::DualSolver`] computes the Raviart–Thomas flux minimising
//!    the estimator, [`estimator::eta`] evaluates it;
//! 3. [`bounds`] turns estimator values and a lower bound of the next
//!    eigenvalue (from a Crouzeix–Raviart computation) into guaranteed and
//!    asymptotic bounds.
//!
//! [`driver`] strings these steps together for uniform and adaptive
//! refinement runs and writes CSV/SVG output.

pub mod analytic;
pub mod bounds;
pub mod driver;
pub mod error;
pub mod estimator;
pub mod fem;
pub mod mesh;
pub mod quadrature;
pub mod solvers;
pub mod sparse;

pub use error::{BoundError, Error, Result};
