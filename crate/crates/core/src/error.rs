// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::sdp::SolverError;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not an isometry (residual {0:.3e})")]
    NotIsometry(f64),

    #[error("Kraus operators violate completeness (residual {0:.3e})")]
    Completeness(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("negative Lindblad rate {0}")]
    NegativeRate(f64),

    #[error("singular Fisher information: outcome {index} has p = {prob:.3e} but dp = {deriv:.3e}")]
    SingularFisher { index: usize, prob: f64, deriv: f64 },

    #[error("SLD equation is ill-posed: derivative leaves the support (residual {0:.3e})")]
    IllPosedSld(f64),

    #[error("support changes between neighbouring states (rank {0} vs {1})")]
    RankChange(usize, usize),

    #[error("objective returned a non-finite value")]
    NonFinite,

    #[error("posterior vanished: the observed outcome has zero likelihood on the whole grid")]
    EmptyPosterior,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}
