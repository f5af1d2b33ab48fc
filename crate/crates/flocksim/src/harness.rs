//! Experiment runner: groups x agents x rounds, JSONL persistence, and
//! the group comparison.
//!
//! Every random draw comes from a per-(agent, purpose, round) stream, so
//! the full output is a pure function of (config, master seed) no matter
//! how agents are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::domain::{
    candidate_is_admissible, ExperimentConfig, FeatureVector, Group, RoundRecord, TweetCandidate,
};
use crate::environment::{AgentEnvironment, ReplayReader};
use crate::error::{Error, Result};
use crate::features::FeatureSchema;
use crate::reward::{adviser_reward, agent_reward};
use crate::policies::PolicyState;
use crate::rng::stream;
use crate::stats;

pub use crate::stats::one_sided_t_test;

/// Per-agent result of a run.
#[derive(Clone, Debug)]
pub struct AgentOutcome {
    pub agent_id: String,
    pub group: Group,
    /// Cumulative follower count after each round (length T).
    pub follower_trajectory: Vec<f64>,
    pub divergence_events: u64,
}

impl AgentOutcome {
    pub fn final_followers(&self) -> f64 {
        self.follower_trajectory.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgentReport {
    pub agent_id: String,
    pub group: Group,
    pub final_followers: f64,
    pub divergence_events: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: Group,
    pub mean_final: f64,
    pub median_final: f64,
    pub stddev_final: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub rounds: u64,
    pub agents: Vec<AgentReport>,
    pub groups: Vec<GroupReport>,
}

/// One row of the per-group checkpoint table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupCheckpointRow {
    pub group: Group,
    pub checkpoint: u64,
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
}

/// Runs one agent for the configured number of rounds, handing each
/// completed `RoundRecord` to `on_record`.
pub fn run_single_agent(
    config: &ExperimentConfig,
    group: Group,
    index: usize,
    filter: &(dyn Fn(&str) -> bool + Sync),
    mut on_record: impl FnMut(&RoundRecord) -> Result<()>,
) -> Result<AgentOutcome> {
    let agent_id = format!("{group}_{index:02}");
    let seed = config.master_seed;
    let schema = FeatureSchema::new(config.feature_dim, config.text_length_cap)?;
    let mut env =
        AgentEnvironment::new(seed, &agent_id, config.feature_dim, config.environment.clone())?;
    let mut policy = PolicyState::new(group, config);

    let mut cumulative = 0.0f64;
    let mut trajectory = Vec::with_capacity(config.rounds as usize);
    let mut divergence_events = 0u64;

    for t in 0..config.rounds {
        let mut actions_rng = stream(seed, &agent_id, "actions", t);
        let sampled = env.sample_action_set(t, config.actions_per_round, &mut actions_rng)?;
        let admissible: Vec<&TweetCandidate> = sampled
            .iter()
            .filter(|c| candidate_is_admissible(c, filter))
            .collect();
        if admissible.is_empty() {
            return Err(Error::EmptyInput(format!(
                "round {t}: no admissible candidates for {agent_id}"
            )));
        }
        let features: Vec<FeatureVector> = admissible
            .iter()
            .map(|c| schema.extract(c, t))
            .collect::<Result<_>>()?;

        let mut select_rng = stream(seed, &agent_id, "select", t);
        let chosen = policy.select_action(&features, config.epsilon, &mut select_rng)?;

        let mut follow_rng = stream(seed, &agent_id, "follow", t);
        let followed_poster = follow_rng.random::<f64>() < config.follow_probability;

        let unchosen: Vec<&FeatureVector> = features
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != chosen)
            .map(|(_, x)| x)
            .collect();
        let mut response_rng = stream(seed, &agent_id, "response", t);
        let (outcome, adviser_outcomes) =
            env.respond(&features[chosen], &unchosen, followed_poster, &mut response_rng)?;

        let reward = agent_reward(&outcome, &config.reward)?;
        let adviser_rewards: Vec<f64> = adviser_outcomes
            .iter()
            .map(|o| adviser_reward(o, &config.reward))
            .collect();

        let mut record = RoundRecord {
            agent_id: agent_id.clone(),
            group,
            round_index: t,
            candidates: features,
            chosen,
            followed_poster,
            outcome,
            adviser_outcomes,
            reward,
            adviser_rewards,
            committed_weights: None,
        };
        let effect = policy.observe_outcome(&record)?;
        if effect.divergence_fallback {
            divergence_events += 1;
        }
        if group == Group::GE {
            record.committed_weights = effect.committed_snapshot;
        }
        on_record(&record)?;

        cumulative += record.outcome.delta_agent_followers;
        trajectory.push(cumulative);

        let mut drift_rng = stream(seed, &agent_id, "drift", t);
        env.drift_step(&mut drift_rng);
        env.maybe_changepoint(t + 1, &mut drift_rng);
    }

    Ok(AgentOutcome { agent_id, group, follower_trajectory: trajectory, divergence_events })
}

/// Convenience wrapper that keeps all records in memory. Intended for
/// small configurations.
pub fn run_single_agent_collect(
    config: &ExperimentConfig,
    group: Group,
    index: usize,
) -> Result<(AgentOutcome, Vec<RoundRecord>)> {
    let mut records = Vec::with_capacity(config.rounds as usize);
    let outcome = run_single_agent(config, group, index, &crate::domain::accept_all, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok((outcome, records))
}

/// Runs the full experiment, writing one `agent_<group>_<id>.jsonl` per
/// agent plus `summary.json` and `groups.csv` into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentSummary> {
    let config = crate::domain::validate_config(config.clone())?;
    std::fs::create_dir_all(out_dir)?;

    let specs: Vec<(Group, usize)> = config
        .groups
        .iter()
        .flat_map(|&g| (0..config.n_agents_per_group).map(move |i| (g, i)))
        .collect();

    let run_one = |&(group, index): &(Group, usize)| -> Result<AgentOutcome> {
        let path = out_dir.join(format!("agent_{group}_{index:02}.jsonl"));
        let file = File::create(&path)?;
        let mut writer = BufWriter::with_capacity(1 << 20, file);
        let outcome = run_single_agent(&config, group, index, &crate::domain::accept_all, |r| {
            serde_json::to_writer(&mut writer, r)?;
            writer.write_all(b"\n")?;
            Ok(())
        })?;
        writer.flush()?;
        Ok(outcome)
    };

    let outcomes: Vec<AgentOutcome> = if config.parallel {
        specs.par_iter().map(run_one).collect::<Result<_>>()?
    } else {
        specs.iter().map(run_one).collect::<Result<_>>()?
    };

    let summary = summarize(&config, &outcomes);
    let summary_file = File::create(out_dir.join("summary.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(summary_file), &summary)?;

    let checkpoints = default_checkpoints(config.rounds);
    let rows = checkpoint_rows(&outcomes, &checkpoints)?;
    write_groups_csv(&out_dir.join("groups.csv"), &rows)?;

    Ok(summary)
}

fn summarize(config: &ExperimentConfig, outcomes: &[AgentOutcome]) -> ExperimentSummary {
    let agents: Vec<AgentReport> = outcomes
        .iter()
        .map(|o| AgentReport {
            agent_id: o.agent_id.clone(),
            group: o.group,
            final_followers: o.final_followers(),
            divergence_events: o.divergence_events,
        })
        .collect();
    let groups = config
        .groups
        .iter()
        .map(|&g| {
            let finals: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.group == g)
                .map(|o| o.final_followers())
                .collect();
            GroupReport {
                group: g,
                mean_final: stats::mean(&finals),
                median_final: stats::median(&finals),
                stddev_final: stats::population_std(&finals),
            }
        })
        .collect();
    ExperimentSummary { rounds: config.rounds, agents, groups }
}

/// Quartile checkpoints of a run of length `rounds`.
pub fn default_checkpoints(rounds: u64) -> Vec<u64> {
    let mut cps: Vec<u64> = [rounds / 4, rounds / 2, 3 * rounds / 4, rounds]
        .into_iter()
        .filter(|&c| c > 0)
        .collect();
    cps.dedup();
    cps
}

/// Per-group mean/median/stddev of cumulative follower counts at the
/// given checkpoints, from in-memory trajectories.
pub fn checkpoint_rows(
    outcomes: &[AgentOutcome],
    checkpoints: &[u64],
) -> Result<Vec<GroupCheckpointRow>> {
    let mut groups: Vec<Group> = outcomes.iter().map(|o| o.group).collect();
    groups.dedup();
    let mut rows = Vec::new();
    for &cp in checkpoints {
        for &g in &groups {
            let values: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.group == g)
                .map(|o| {
                    if cp == 0 || cp as usize > o.follower_trajectory.len() {
                        Err(Error::Validation(format!("checkpoint {cp} out of range")))
                    } else {
                        Ok(o.follower_trajectory[cp as usize - 1])
                    }
                })
                .collect::<Result<_>>()?;
            rows.push(GroupCheckpointRow {
                group: g,
                checkpoint: cp,
                mean: stats::mean(&values),
                median: stats::median(&values),
                stddev: stats::population_std(&values),
            });
        }
    }
    Ok(rows)
}

/// Reads agent logs back from `log_dir` and produces the checkpoint
/// table from the persisted cumulative follower deltas.
pub fn group_summary(log_dir: &Path, checkpoints: &[u64]) -> Result<Vec<GroupCheckpointRow>> {
    let mut outcomes = Vec::new();
    for path in agent_log_paths(log_dir)? {
        let mut trajectory = Vec::new();
        let mut cumulative = 0.0;
        let mut group = None;
        let mut agent_id = String::new();
        for record in ReplayReader::open(&path, None)? {
            let record = record?;
            cumulative += record.outcome.delta_agent_followers;
            trajectory.push(cumulative);
            group = Some(record.group);
            agent_id = record.agent_id;
        }
        if let Some(group) = group {
            outcomes.push(AgentOutcome {
                agent_id,
                group,
                follower_trajectory: trajectory,
                divergence_events: 0,
            });
        }
    }
    if outcomes.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no agent logs found in {}",
            log_dir.display()
        )));
    }
    checkpoint_rows(&outcomes, checkpoints)
}

/// Agent log files in a run directory, sorted by name.
pub fn agent_log_paths(log_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(log_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("agent_") && n.ends_with(".jsonl"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn write_groups_csv(path: &Path, rows: &[GroupCheckpointRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "group,checkpoint,mean,median,stddev")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.group, r.checkpoint, r.mean, r.median, r.stddev)?;
    }
    out.flush()?;
    Ok(())
}
