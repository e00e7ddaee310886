//! Grid strength assessment for multi-infeed LCC-HVDC systems using the
//! generalized short circuit ratio (gSCR).
//!
//! * [`netmodel`] loads case files, builds and Kron-reduces the network.
//! * [`converter`] is the CP-CEA inverter steady state and its sensitivities.
//! * [`gscr`] computes the extended Jacobian spectrum and strength class.
//! * [`powerflow`] solves the AC/DC flow and traces the MAP.
//! * [`boundary`] finds critical and boundary ratios.
//! * [`cli`] is the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cli;
pub mod converter;
pub mod gscr;
pub mod netmodel;
pub mod powerflow;

pub use boundary::BoundaryError;
pub use converter::ConverterError;
pub use gscr::GscrError;
pub use netmodel::{CaseError, NetworkError};
pub use powerflow::PowerFlowError;

/// Any error the library can produce.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Converter(#[from] ConverterError),
    #[error(transparent)]
    Gscr(#[from] GscrError),
    #[error(transparent)]
    PowerFlow(#[from] PowerFlowError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
}

impl Error {
    /// True for problems with the input rather than the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Case(_) | Error::Boundary(BoundaryError::Case(_))
        )
    }
}
