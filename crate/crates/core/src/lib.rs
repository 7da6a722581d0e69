//! Exact solutions by quadratures for book-algebra Lie–Hamilton systems,
//! complex Bernoulli equations and their quantum deformations, with an
//! independent Dormand–Prince oracle and numeric checks of the underlying
//! algebraic identities.

pub mod coeff;
mod error;
pub mod exact;
pub mod odecheck;
pub mod quad;
pub mod structure;
pub mod systems;

pub use coeff::{CoeffError, CoeffPair, Coefficient, Family};
pub use quad::{cumulative, integrate, CumulativeIntegral, Integrand, QuadConfig, QuadError};
pub use error::Error;
pub use exact::{fit_initial, solve, solve_from, ExactTrajectory, SolutionParams, Trajectory, Validity};
pub use odecheck::{compare, integrate as integrate_ode, NumericTrajectory, OdeConfig, OdeError};
