use thiserror::Error;

use crate::coeff::CoeffError;
use crate::odecheck::OdeError;
use crate::quad::QuadError;
use crate::systems::SystemError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("initial state {state:?} is outside the chart of {system}: {reason}")]
    Domain {
        system: String,
        state: Vec<f64>,
        reason: String,
    },
    #[error("t = {t} is outside the validity interval [{start}, {end}]")]
    OutsideValidity { t: f64, start: f64, end: f64 },
    #[error("implicit solve for x did not converge at gamma = {gamma}")]
    RootFinding { gamma: f64 },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// True for failures of a numerical tolerance rather than of the input.
    pub fn is_accuracy(&self) -> bool {
        matches!(
            self,
            Error::Quad(QuadError::Accuracy { .. })
                | Error::RootFinding { .. }
                | Error::Ode(OdeError::MaxSteps { .. })
        )
    }
}
