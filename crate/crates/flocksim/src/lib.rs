//! Synthetic nonstationary social-stream simulator and contextual-bandit
//! learning framework.
//!
//! A population of agents repeatedly picks one of `K` candidate status
//! updates to repost, observes engagement and follower deltas drawn from
//! a drifting per-agent latent preference vector, and learns a linear
//! value model under one of three policies: uniform random (`UR`),
//! gradual SGD with a periodic adviser blend (`GE`), or batch refits
//! over the full history (`BE`). Every run is reproducible bit-for-bit
//! from a single master seed and writes JSONL round logs that the
//! [`analysis`] module consumes offline.
//!
//! Quick start:
//!
//! ```no_run
//! use flocksim::domain::ExperimentConfig;
//! use flocksim::harness::run_experiment;
//!
//! let mut config = ExperimentConfig::default();
//! config.master_seed = 42;
//! config.rounds = 100;
//! let summary = run_experiment(&config, std::path::Path::new("out")).unwrap();
//! println!("{} agents simulated", summary.agents.len());
//! ```

pub mod analysis;
pub mod domain;
pub mod environment;
pub mod error;
pub mod estimators;
pub mod features;
pub mod harness;
pub mod policies;
pub mod reward;
pub mod rng;
pub mod stats;

pub use domain::{ExperimentConfig, Group, RoundRecord};
pub use error::{Error, Result};
