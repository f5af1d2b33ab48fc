//! Offline analyses over round logs: reward normalization, chunked MSE,
//! drift curves, pooled-vs-per-agent comparison, and GE weight
//! dispersion. Everything here is a pure function of logged data; the
//! environment is never touched.

use serde::Serialize;
use std::path::Path;

use crate::domain::{Group, RoundRecord};
use crate::environment::ReplayReader;
use crate::error::{Error, Result};
use crate::estimators::{predict, Dataset, Fitter};
use crate::stats;

/// Which logged quantity a model is trained to predict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    /// The full reward signal (default).
    Reward,
    /// The raw follower delta of the chosen tweet.
    FollowerDelta,
}

/// One agent's chronological (chosen features, target) rows.
#[derive(Clone, Debug)]
pub struct AgentRows {
    pub agent_id: String,
    pub group: Group,
    pub rows: Dataset,
}

/// Builds the (x_chosen, target) dataset of one chronological log.
pub fn rows_from_records(records: &[RoundRecord], target: TargetKind) -> Result<Dataset> {
    let dim = records
        .first()
        .map(|r| r.candidates[r.chosen].dim())
        .unwrap_or(0);
    let mut data = Dataset::new(dim);
    for r in records {
        let y = match target {
            TargetKind::Reward => r.reward,
            TargetKind::FollowerDelta => r.outcome.delta_agent_followers,
        };
        data.push(r.candidates[r.chosen].as_slice(), y)?;
    }
    Ok(data)
}

/// Loads every agent log in a run directory.
pub fn load_agent_rows(log_dir: &Path, target: TargetKind) -> Result<Vec<AgentRows>> {
    let mut out = Vec::new();
    for path in crate::harness::agent_log_paths(log_dir)? {
        let records: Vec<RoundRecord> =
            ReplayReader::open(&path, None)?.collect::<Result<Vec<_>>>()?;
        if records.is_empty() {
            continue;
        }
        out.push(AgentRows {
            agent_id: records[0].agent_id.clone(),
            group: records[0].group,
            rows: rows_from_records(&records, target)?,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no non-empty agent logs in {}",
            log_dir.display()
        )));
    }
    Ok(out)
}

/// z-scores the series to zero mean and unit population standard
/// deviation.
pub fn normalize_series(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::EmptyInput("normalize_series needs >= 2 values".into()));
    }
    let mean = stats::mean(values);
    let std = stats::population_std(values);
    if std <= 1e-12 {
        return Err(Error::Stats("zero variance series cannot be normalized".into()));
    }
    Ok(values.iter().map(|v| (v - mean) / std).collect())
}

/// Fit on the first `train_n` rows, mean squared error on the rest.
fn split_mse(data: &Dataset, train_n: usize, fitter: Fitter) -> Result<f64> {
    if train_n == 0 || train_n >= data.len() {
        return Err(Error::EmptyInput(format!(
            "split needs 0 < train_n < n (train_n = {train_n}, n = {})",
            data.len()
        )));
    }
    let model = fitter.fit(&data.slice(0..train_n))?;
    let mut sum = 0.0;
    for i in train_n..data.len() {
        let pred = predict(&model, &crate::domain::FeatureVector(data.row(i).to_vec()))?;
        let err = data.target(i) - pred;
        sum += err * err;
    }
    Ok(sum / (data.len() - train_n) as f64)
}

fn normalized(data: &Dataset) -> Result<Dataset> {
    data.with_targets(normalize_series(data.targets())?)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChunkedMse {
    pub per_chunk: Vec<f64>,
    pub median: f64,
}

/// Partitions the rows chronologically into full `chunk_size` chunks
/// (remainder dropped); within each chunk fits on the first
/// `train_frac` and scores on the rest, over normalized targets.
pub fn chunked_mse(
    rows: &Dataset,
    chunk_size: usize,
    train_frac: f64,
    fitter: Fitter,
) -> Result<ChunkedMse> {
    if chunk_size < 2 {
        return Err(Error::Validation("chunk_size must be >= 2".into()));
    }
    if !(0.0 < train_frac && train_frac < 1.0) {
        return Err(Error::Validation("train_frac must be in (0, 1)".into()));
    }
    if rows.len() < chunk_size {
        return Err(Error::EmptyInput(format!(
            "need at least one full chunk ({} rows < chunk_size {chunk_size})",
            rows.len()
        )));
    }
    let data = normalized(rows)?;
    let n_chunks = data.len() / chunk_size;
    let train_n = ((chunk_size as f64) * train_frac).floor() as usize;
    let mut per_chunk = Vec::with_capacity(n_chunks);
    for c in 0..n_chunks {
        let chunk = data.slice(c * chunk_size..(c + 1) * chunk_size);
        per_chunk.push(split_mse(&chunk, train_n, fitter)?);
    }
    let median = stats::median(&per_chunk);
    Ok(ChunkedMse { per_chunk, median })
}

/// The all-data baseline for [`chunked_mse`]: one model over the whole
/// series, same train fraction, same normalization.
pub fn all_data_mse(rows: &Dataset, train_frac: f64, fitter: Fitter) -> Result<f64> {
    let data = normalized(rows)?;
    let train_n = ((data.len() as f64) * train_frac).floor() as usize;
    split_mse(&data, train_n, fitter)
}

/// Fits on the first `train_n` rows and reports test MSE per
/// consecutive `day_len`-row bin of the remainder (partial final bin
/// dropped), indexed by day offset.
pub fn drift_curve(
    rows: &Dataset,
    train_n: usize,
    day_len: usize,
    fitter: Fitter,
) -> Result<Vec<f64>> {
    if day_len < 1 {
        return Err(Error::Validation("day_len must be >= 1".into()));
    }
    if rows.len() <= train_n {
        return Err(Error::EmptyInput("no test data beyond the training rows".into()));
    }
    let data = normalized(rows)?;
    let model = fitter.fit(&data.slice(0..train_n))?;
    let mut curve = Vec::new();
    let mut start = train_n;
    while start + day_len <= data.len() {
        let mut sum = 0.0;
        for i in start..start + day_len {
            let pred = predict(&model, &crate::domain::FeatureVector(data.row(i).to_vec()))?;
            let err = data.target(i) - pred;
            sum += err * err;
        }
        curve.push(sum / day_len as f64);
        start += day_len;
    }
    if curve.is_empty() {
        return Err(Error::EmptyInput("fewer test rows than one day bin".into()));
    }
    Ok(curve)
}

#[derive(Clone, Debug, Serialize)]
pub struct PooledComparison {
    /// Median across agents of each agent's own fit/test MSE.
    pub per_agent_median: f64,
    /// One model over the concatenation of all agents' rows.
    pub pooled_all: f64,
    /// Mean MSE over moving windows (half-window stride) of the
    /// concatenation, window size = per-agent sample count.
    pub pooled_window: f64,
    /// Rows in the pooled concatenation.
    pub pooled_rows: usize,
}

/// Compares per-agent training against pooled training on each agent's
/// first `per_agent_n` rows (75/25 split throughout).
pub fn pooled_vs_per_agent(
    agents: &[Dataset],
    per_agent_n: usize,
    fitter: Fitter,
) -> Result<PooledComparison> {
    if agents.is_empty() {
        return Err(Error::EmptyInput("no agents".into()));
    }
    let train_frac = 0.75;
    let train_n = ((per_agent_n as f64) * train_frac).floor() as usize;

    let mut per_agent = Vec::with_capacity(agents.len());
    let mut pooled = Dataset::new(agents[0].dim());
    for rows in agents {
        if rows.len() < per_agent_n {
            return Err(Error::EmptyInput(format!(
                "an agent has only {} rows (< {per_agent_n})",
                rows.len()
            )));
        }
        let head = normalized(&rows.slice(0..per_agent_n))?;
        per_agent.push(split_mse(&head, train_n, fitter)?);
        pooled.append(&head)?;
    }
    let per_agent_median = stats::median(&per_agent);

    let pooled_train = ((pooled.len() as f64) * train_frac).floor() as usize;
    let pooled_all = split_mse(&pooled, pooled_train, fitter)?;

    // moving windows, half-window stride so windows straddle agents
    let stride = (per_agent_n / 2).max(1);
    let mut window_mses = Vec::new();
    let mut start = 0;
    while start + per_agent_n <= pooled.len() {
        let window = pooled.slice(start..start + per_agent_n);
        window_mses.push(split_mse(&window, train_n, fitter)?);
        start += stride;
    }
    let pooled_window = stats::mean(&window_mses);

    Ok(PooledComparison {
        per_agent_median,
        pooled_all,
        pooled_window,
        pooled_rows: pooled.len(),
    })
}

/// Cross-agent weight statistics at one commit round.
#[derive(Clone, Debug, Serialize)]
pub struct DispersionPoint {
    pub round: u64,
    /// Per-coordinate median of committed weights across agents.
    pub median_weights: Vec<f64>,
    /// Per-coordinate standard deviation across agents.
    pub stddev_weights: Vec<f64>,
    /// Mean of `stddev_weights` — the scalar dispersion summary.
    pub mean_stddev: f64,
}

/// Time series of cross-agent committed-weight dispersion, over the
/// commit rounds present in every GE agent's log.
pub fn weight_dispersion(agent_records: &[Vec<RoundRecord>]) -> Result<Vec<DispersionPoint>> {
    if agent_records.len() < 2 {
        return Err(Error::EmptyInput("weight dispersion needs >= 2 agents".into()));
    }
    let snapshots: Vec<Vec<(u64, &Vec<f64>)>> = agent_records
        .iter()
        .map(|records| {
            records
                .iter()
                .filter_map(|r| r.committed_weights.as_ref().map(|w| (r.round_index, w)))
                .collect()
        })
        .collect();
    if snapshots.iter().any(|s| s.is_empty()) {
        return Err(Error::EmptyInput(
            "an agent log carries no committed-hypothesis snapshots".into(),
        ));
    }
    // commit rounds present in every agent
    let mut rounds: Vec<u64> = snapshots[0].iter().map(|(r, _)| *r).collect();
    for s in &snapshots[1..] {
        let theirs: Vec<u64> = s.iter().map(|(r, _)| *r).collect();
        rounds.retain(|r| theirs.contains(r));
    }
    if rounds.is_empty() {
        return Err(Error::EmptyInput("no shared commit rounds across agents".into()));
    }

    let mut out = Vec::with_capacity(rounds.len());
    for &round in &rounds {
        let weights: Vec<&Vec<f64>> = snapshots
            .iter()
            .map(|s| s.iter().find(|(r, _)| *r == round).map(|(_, w)| *w).unwrap())
            .collect();
        let dim = weights[0].len();
        let mut median_weights = Vec::with_capacity(dim);
        let mut stddev_weights = Vec::with_capacity(dim);
        for j in 0..dim {
            let coord: Vec<f64> = weights.iter().map(|w| w[j]).collect();
            median_weights.push(stats::median(&coord));
            stddev_weights.push(stats::population_std(&coord));
        }
        let mean_stddev = stats::mean(&stddev_weights);
        out.push(DispersionPoint { round, median_weights, stddev_weights, mean_stddev });
    }
    Ok(out)
}
