pub mod bundle;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod solver;
pub mod sparse;
pub mod topology;
pub mod verify;
pub mod vortex;

pub use error::{Result, VortexError};
