//! Numerical workbench for rearrangements, mean and local oscillations, BMO/CMO diagnostics,
//! Muckenhoupt weights and commutators of singular and fractional integrals on uniform grids.

pub mod error;
pub mod grid;
pub mod numeric;

pub use error::{Error, Result};
pub mod rearrange;
pub mod oscillation;
pub mod operators;
pub mod weights;
pub mod cmo;
pub mod bounds;
pub mod compactness;
pub mod cli;
