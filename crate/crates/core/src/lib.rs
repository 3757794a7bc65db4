//! Compile arbitrary unitaries into the coin settings of a coined
//! discrete-time quantum walk, simulate the result, map it onto a
//! time-multiplexed loop, and benchmark imperfection resilience against
//! Reck, Clements and single-loop meshes.

pub mod compiler;
pub mod error;
pub mod hardware;
pub mod linalg;
pub mod meshes;
pub mod metrics;
pub mod noise;
pub mod selftest;
pub mod sweep;
pub mod walk;

pub use error::{Error, Result};
