//! Pseudospectral splitting integrators for the cubic nonlinear Schrödinger
//! equation `i u_t = u_xx + lambda |u|^2 u` on the torus `(-pi, pi)`.

pub mod cli;
pub mod datagen;
pub mod error;
pub mod experiments;
pub mod flows;
pub mod integrators;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
