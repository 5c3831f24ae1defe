//! Numerical toolkit for bicomplex pseudoanalytic functions on planar domains.
//!
//! The crate builds weak L² solutions of the bicomplex Vekua equation
//! `∂̄W = aW + bW̄` on uniform grids, orthonormalises them into a truncated
//! Vekua–Bergman basis with its reproducing kernel and projection, and
//! implements the main Vekua equation machinery (conductivity equations,
//! metaharmonic conjugates and the associated Hilbert transform).

pub mod bergman;
pub mod bicomplex;
pub mod calculus;
pub mod domain;
pub mod error;
pub mod integral;
pub mod io;
mod linsolve;
pub mod main_vekua;
pub mod vekua;
pub mod verify;

pub use bergman::{gram_schmidt, kernel_eval, kernel_samples, project, KernelSample, OrthoBasis};
pub use bicomplex::{hat, hat_power, Bicomplex, IdempotentPair};
pub use calculus::{analytic_power, d, d_bar, inner_l2, integrate, lp_norm, vekua_residual, GridFunction};
pub use domain::{BoundaryPoint, Domain, DomainSpec, Grid};
pub use error::{Error, Result};
pub use integral::{borel_pompeiu_residual, cauchy_boundary, theodorescu, theodorescu_adjoint, KernelWeights};
pub use main_vekua::{
    anti_conjugate, b_from_f, conductivity_residuals, dirichlet_solve, hilbert_transform, metaharmonic_conjugate,
    radial_conjugation, schrodinger_residuals, BoundaryData, Conductivity, ConductivityProfile,
};
pub use num_complex::Complex64;
pub use vekua::{
    hodge_complement_element, make_solution_set, phi_a, q_apply, s_apply, solve_s, Coefficients, SolveMethod,
    SolverReport, VekuaSolutionSet,
};
