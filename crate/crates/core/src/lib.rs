//! Collocation, iterated collocation and modified collocation for
//! second-kind Fredholm equations `x - Kx = f` on `[0, 1]` whose kernels are
//! Green's functions: smooth on each side of the diagonal, continuous across it.

pub mod divdiff;
pub mod error;
pub mod function;
pub mod kernel;
pub mod linalg;
pub mod meshspace;
pub mod operator;
pub mod projection;
pub mod quadrature;
pub mod solvers;

pub use error::{Error, Result};
pub use function::{sup_norm, EvaluableFunction};
pub use kernel::{GreensKernel, KernelPiece};
pub use meshspace::{CollocationGrid, PiecewisePolynomial, UniformMesh};
pub use operator::IntegralOperator;
pub use quadrature::GaussRule;
pub use solvers::{FredholmProblem, Method, SolveResult};
