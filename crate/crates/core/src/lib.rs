//! Plane-wave Galerkin discretization of periodic Schrödinger operators with
//! Coulomb singularities, and tools to study how the lowest eigenvalues
//! converge with the cutoff.

// `!(x > 0.0)` is how NaN gets rejected along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod eigensolver;
pub mod error;
pub mod fft;
pub mod lattice;
pub mod operator;
pub mod potential;

pub use eigensolver::{
    phase_normalize, solve_lowest, solve_lowest_from, EigenSolution, SolverMethod, SolverOptions,
};
pub use error::{Error, Result};
pub use lattice::{basis_cardinality, build_basis, Cell, CutoffBasis, FourierField, Shape};
pub use operator::{HamiltonianOperator, HamiltonianSpec};
pub use potential::{
    assemble_potential_field, coulomb_coefficient, Charge, ChargeConfig, SmoothPotential,
};
