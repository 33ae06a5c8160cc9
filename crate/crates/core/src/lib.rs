//! Two-phase theta-function solutions of the focusing nonlinear Schrödinger
//! equation `i p_t + p_xx + 2|p|²p = 0`, built from a symmetric genus-2
//! spectral curve, together with a numerical verification stack.

pub mod cli;
pub mod contour;
pub mod curve;
pub mod elliptic;
pub mod error;
pub mod limits;
pub mod linalg;
pub mod quad;
pub mod solution;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
