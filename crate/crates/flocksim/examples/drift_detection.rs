//! Diagnose environment nonstationarity from logged rounds.
//!
//! Runs one drifting agent and one stationary agent, fits a model on each
//! agent's early rounds, and prints test error bucketed by simulated day.
//! Under drift the error climbs as the test rounds get farther from the
//! training window; without drift the curve stays flat.
//!
//! ```sh
//! cargo run --release --example drift_detection
//! ```

#![allow(clippy::field_reassign_with_default)]

use flocksim::analysis::{self, TargetKind};
use flocksim::domain::{ExperimentConfig, Group};
use flocksim::environment::ResponseCurve;
use flocksim::estimators::Fitter;
use flocksim::harness::run_single_agent_collect;

fn config(sigma: f64) -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.master_seed = 60;
    config.groups = vec![Group::UR];
    config.rounds = 644;
    config.actions_per_round = 20;
    config.feature_dim = 24;
    config.environment.drift_sigma = sigma;
    config.environment.expectation_mode = true;
    config.environment.response_curve = ResponseCurve::Linear;
    config.environment.base_weight_scale = 0.25;
    config.environment.rates.p_unfollow = 0.0;
    config.environment.rates.p_reciprocal = 0.0;
    config
}

fn curve(sigma: f64) -> flocksim::Result<Vec<f64>> {
    let (_, records) = run_single_agent_collect(&config(sigma), Group::UR, 0)?;
    let rows = analysis::rows_from_records(&records, TargetKind::Reward)?;
    analysis::drift_curve(&rows, 500, 24, Fitter::Ridge(1e-6))
}

fn main() -> flocksim::Result<()> {
    let drifting = curve(0.1)?;
    let flat = curve(0.0)?;

    println!("test MSE by day since end of training (train = first 500 rounds):");
    println!("{:>4} {:>14} {:>14}", "day", "drift", "stationary");
    for (d, (a, b)) in drifting.iter().zip(&flat).enumerate() {
        println!("{d:>4} {a:>14.6} {b:>14.6}");
    }
    println!("\nthe drifting environment's error grows with distance from training;");
    println!("the stationary one stays at numerical noise");
    Ok(())
}
