//! Borsuk partitions of finite point sets in four-dimensional l_p space,
//! Banach-Mazur sandwich certificates between cubes and l_p balls, and
//! numerical verification of coverings of l_p balls by shrunken translates.

#[cfg(test)]
#[macro_use]
mod test_macros;

pub mod cli;
pub mod covering;
pub mod error;
pub mod exact;
pub mod hadamard;
pub mod lpcore;
pub mod partition;
pub mod sandwich;

pub use error::{Error, Result};
pub use lpcore::{DiameterWitness, PNorm, PointCloud};
