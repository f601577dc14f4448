//! branchlab: simulation and verification laboratory for branching Markov
//! chains in varying environments.
//!
//! The population is a branching process whose offspring law changes per
//! generation with an environment sequence; each individual carries a trait
//! that its children inherit through a random transition. The crate
//! simulates the population and trait process, builds the auxiliary Markov
//! chain describing a typical lineage, and verifies the laws of large
//! numbers (forward, backward, whole-tree) and the central limit theorem of
//! the occupation measure against exact small-instance oracles.
//!
//! Start with the runnable examples (`cargo run --release --example
//! forward_lln`, etc.), one per capability, or the `branchlab` binary for
//! config-driven runs.

pub mod config;
pub mod env;
pub mod error;
pub mod experiments;
pub mod gallery;
pub mod kernels;
pub mod matrix;
pub mod measure;
pub mod report;
pub mod rng;
pub mod runner;
pub mod sim;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
