//! Qualitative numerics for real solutions of y'' = 6y^2 - x on the
//! non-positive semi-axis: pole-regularized trajectories, level-parametrized
//! solution families, the extremal interval-of-existence functions and their
//! inverses, Dirichlet boundary-value solvability, and zero spacings.

pub mod bvp;
pub mod extremal;
pub mod integrals;
pub mod integrate;
pub mod level;
pub mod ode;
pub mod opt;
pub mod quad;
pub mod report;
pub mod spacing;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("integrator could not meet the tolerance near x = {x}")]
    StepFailure { x: f64 },
    #[error("no pole found within span {span} of x = {x0}")]
    SpanExceeded { x0: f64, span: f64 },
    #[error("polar patch is undefined for y <= 0 (got y = {y})")]
    NonPositiveY { y: f64 },
    #[error("bracketing failed: {0}")]
    BracketFailure(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("residual target unmet: {0}")]
    ToleranceFailure(String),
    #[error("quadrature did not converge")]
    Quadrature,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use extremal::{maximal_solution, x_fn, x_min_fn, x_minus_fn, xi_fns, ExtremalResult};
pub use integrate::{
    integrate_both, integrate_from_pole, integrate_ivp, natural_to_polar, polar_to_natural,
    state_at, wronskian_j, Direction, Event, EventKind, PhaseState, PolarState, SolveConfig,
    Trajectory,
};
