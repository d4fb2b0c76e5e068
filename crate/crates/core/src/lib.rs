//! A desk-scale quantum-cloud scheduling laboratory.
//!
//! The crate simulates a fleet of noisy quantum machines with rolling
//! calibration cycles, compiles small benchmark circuits onto them with a
//! noise-aware transpiler, fits product-linear fidelity and execution-time
//! predictors, and runs a utility-based job scheduler against Only-Fidelity
//! and Only-WaitTime baselines under configurable load, QOS bounds and
//! calibration policies.
//!
//! Modules follow the pipeline:
//!
//! - [`fleet`]: machines, calibration snapshots, synthetic fleet generation
//! - [`circuits`]: the logical IR and benchmark generators
//! - [`transpiler`]: noise-aware layout, SWAP routing, feature extraction
//! - [`noise`]: analytic and sampled probability-of-success oracles
//! - [`predict`]: product-linear models, Gauss-Newton fitting, queue times
//! - [`scheduler`]: the utility function and machine selection policies
//! - [`sim`]: the discrete-event cloud simulation and policy comparison
//! - [`config`]: experiment configuration with explicit seeds

pub mod circuits;
pub mod config;
pub mod error;
pub mod fleet;
pub mod noise;
pub mod predict;
pub mod scheduler;
pub mod sim;
pub mod transpiler;

pub use error::{Error, Result};
