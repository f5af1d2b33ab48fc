//! Run a small three-group experiment end to end and print the final
//! follower statistics per group.
//!
//! ```sh
//! cargo run --release --example quickstart
//! ```

#![allow(clippy::field_reassign_with_default)]

use flocksim::domain::{ExperimentConfig, Group};
use flocksim::harness::run_experiment;

fn main() -> flocksim::Result<()> {
    let mut config = ExperimentConfig::default();
    config.master_seed = 7;
    config.rounds = 200;
    config.n_agents_per_group = 8;
    config.groups = vec![Group::UR, Group::GE, Group::BE];

    let out_dir = std::env::temp_dir().join("flocksim_quickstart");
    let summary = run_experiment(&config, &out_dir)?;

    println!(
        "ran {} rounds for {} agents; logs in {}",
        summary.rounds,
        summary.agents.len(),
        out_dir.display()
    );
    println!("{:<6} {:>10} {:>10} {:>10}", "group", "mean", "median", "stddev");
    for g in &summary.groups {
        println!(
            "{:<6} {:>10.2} {:>10.2} {:>10.2}",
            g.group.to_string(),
            g.mean_final,
            g.median_final,
            g.stddev_final
        );
    }
    Ok(())
}
