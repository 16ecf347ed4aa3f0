// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Numerical toolkit for quantum parameter estimation: Fisher information,
//! channel and probe optimization, optimal control, error-corrected sensing
//! and adaptive interferometric phase estimation.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod control;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod mzi;
pub mod qcore;
pub mod qec;
pub mod random;
pub mod sdp;
pub mod stateopt;

pub use error::{Error, Result};
