//! Replay a simulation log and audit it offline.
//!
//! Runs one GE agent, writes its round log to a JSONL file, then streams
//! the file back through `ReplayReader` to (a) verify every logged reward
//! against the reward arithmetic and (b) rebuild the follower trajectory
//! without rerunning the simulator.
//!
//! ```sh
//! cargo run --release --example replay_audit
//! ```

#![allow(clippy::field_reassign_with_default)]

use flocksim::domain::{ExperimentConfig, Group};
use flocksim::environment::ReplayReader;
use flocksim::harness::run_single_agent;
use flocksim::reward::agent_reward;
use std::io::Write as _;

fn main() -> flocksim::Result<()> {
    let mut config = ExperimentConfig::default();
    config.master_seed = 7;
    config.rounds = 300;

    let path = std::env::temp_dir().join("flocksim_replay_audit.jsonl");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    run_single_agent(&config, Group::GE, 0, &flocksim::domain::accept_all, |r| {
        serde_json::to_writer(&mut file, r)?;
        writeln!(file)?;
        Ok(())
    })?;
    file.flush()?;

    let mut reader = ReplayReader::open(&path, Some(config.feature_dim))?;
    let mut rounds = 0u64;
    let mut followers = 0.0f64;
    let mut max_reward_err = 0.0f64;
    let mut commits = 0u64;
    while let Some(record) = reader.replay_next() {
        let record = record?;
        let expected = agent_reward(&record.outcome, &config.reward)?;
        max_reward_err = max_reward_err.max((record.reward - expected).abs());
        followers += record.outcome.delta_agent_followers;
        if record.committed_weights.is_some() {
            commits += 1;
        }
        rounds += 1;
    }

    println!("replayed {rounds} rounds from {}", path.display());
    println!("max |logged reward - recomputed reward| = {max_reward_err:.3e}");
    println!("final follower count rebuilt from deltas: {followers}");
    println!(
        "hypothesis commits in log: {commits} (every {} rounds)",
        config.commit_interval
    );
    Ok(())
}
