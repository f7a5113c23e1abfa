//! Finite-difference laboratory for the clamped plate eigenproblem
//! `Δ²u = Γu` with `u = ∂u/∂ν = 0` on the boundary.

pub mod eigensolver;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod inequalities;
pub mod linalg;
pub mod operator;
pub mod oracles;
pub mod richardson;
pub mod sequence;
pub mod trial;

pub use eigensolver::{solve, solve_dense, solve_shift_invert, ShiftInvertOptions, SolveMethod, Spectrum};
pub use error::{Error, Result};
pub use grid::{build_grid, Domain, DomainKind, Grid};
pub use operator::{assemble_biharmonic, assemble_laplacian, DerivativeStencils, SparseSymmetricMatrix};
