//! Demonstrate when pooling training data across agents hurts.
//!
//! Each agent's audience has its own response weights; the
//! `heterogeneity_delta` knob controls how far apart those weights are.
//! With delta = 1 a model pooled across agents predicts far worse than
//! per-agent models (negative transfer). With delta = 0 all agents share
//! one response function and pooling is harmless.
//!
//! ```sh
//! cargo run --release --example negative_transfer
//! ```

#![allow(clippy::field_reassign_with_default)]

use flocksim::analysis::{self, TargetKind};
use flocksim::domain::{ExperimentConfig, Group};
use flocksim::estimators::{Dataset, Fitter};
use flocksim::harness::run_single_agent_collect;

fn agent_rows(delta: f64) -> flocksim::Result<Vec<Dataset>> {
    let mut config = ExperimentConfig::default();
    config.master_seed = 81;
    config.groups = vec![Group::UR];
    config.rounds = 200;
    config.actions_per_round = 20;
    config.feature_dim = 24;
    config.environment.drift_sigma = 0.0;
    config.environment.heterogeneity_delta = delta;
    config.environment.base_weight_scale = 1.0;
    config.environment.expectation_mode = true;
    config.environment.rates.p_unfollow = 0.0;
    config.environment.rates.p_reciprocal = 0.0;
    (0..config.n_agents_per_group)
        .map(|i| {
            let (_, records) = run_single_agent_collect(&config, Group::UR, i)?;
            analysis::rows_from_records(&records, TargetKind::Reward)
        })
        .collect()
}

fn main() -> flocksim::Result<()> {
    println!(
        "{:>6} {:>16} {:>12} {:>15}",
        "delta", "per-agent (med)", "pooled-all", "pooled-window"
    );
    for delta in [0.0, 0.5, 1.0] {
        let rows = agent_rows(delta)?;
        let cmp = analysis::pooled_vs_per_agent(&rows, 200, Fitter::Ridge(1e-2))?;
        println!(
            "{delta:>6.1} {:>16.4} {:>12.4} {:>15.4}",
            cmp.per_agent_median, cmp.pooled_all, cmp.pooled_window
        );
    }
    println!("\nas heterogeneity grows, pooled models fall behind per-agent models");
    Ok(())
}
