//! Small-time scalings, limiting drifts and controllability checks for
//! polynomial SDEs `dx = P(x) dt + sigma dB` with diagonal, possibly
//! degenerate, additive noise.

pub mod control;
pub mod error;
pub mod linalg;
pub mod models;
pub mod numerics;
pub mod poly;
pub mod propagation;
pub mod regular;
pub mod saturation;
pub mod scaling;
pub mod system;

pub use error::{Error, Result};
