#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Monte Carlo system-level simulator for a dual-carrier HSDPA macrocell
//! network, comparing higher-order sectorisation against switched-beam and
//! adaptive antennas.

pub mod antenna;
pub mod beamform;
pub mod config;
pub mod engine;
pub mod error;
pub mod link;
pub mod propagation;
pub mod report;
pub mod tessellation;

pub use error::{Error, Result};
