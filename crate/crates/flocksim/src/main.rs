//! Thin command-line front end over the flocksim library.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/config/parse error.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use flocksim::analysis::{self, TargetKind};
use flocksim::domain::{ExperimentConfig, Group};
use flocksim::environment::read_log;
use flocksim::error::Error;
use flocksim::estimators::{predict, Dataset, Fitter};
use flocksim::features::FeatureSchema;
use flocksim::harness;
use flocksim::policies::PolicyState;
use flocksim::rng::stream;
use flocksim::stats::one_sided_t_test;

#[derive(Parser)]
#[command(name = "flocksim", about = "Nonstationary social-stream bandit simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment and write JSONL logs plus a summary.
    Simulate(SimulateArgs),
    /// Offline analyses over a run's log directory.
    Analyze(AnalyzeArgs),
    /// Counterfactual replay of one agent log through a fresh policy.
    Replay(ReplayArgs),
    /// Dump the feature schema (name -> index) as JSON.
    Schema(SchemaArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed override (beats FLOCKSIM_SEED and the config value).
    #[arg(long)]
    seed: Option<u64>,
    /// Round-count override.
    #[arg(long)]
    rounds: Option<u64>,
    /// Output directory for logs, summary.json, groups.csv.
    #[arg(long, default_value = "run")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(subcommand)]
    kind: AnalyzeKind,
}

#[derive(Args, Clone)]
struct AnalyzeCommon {
    /// Log directory produced by `simulate`.
    #[arg(long)]
    logs: PathBuf,
    /// Output directory for CSV artifacts (defaults to the log dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Regression target: "reward" or "delta".
    #[arg(long, default_value = "reward")]
    target: String,
    /// Ridge penalty for the analysis fits.
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,
}

#[derive(Subcommand)]
enum AnalyzeKind {
    /// Per-day test MSE of a frozen early-window model (Fig. 2 analogue).
    Drift {
        #[command(flatten)]
        common: AnalyzeCommon,
        #[arg(long, default_value_t = 100)]
        train_n: usize,
        #[arg(long, default_value_t = 24)]
        day_len: usize,
    },
    /// Chunked train/test MSE vs the all-data baseline.
    Chunks {
        #[command(flatten)]
        common: AnalyzeCommon,
        #[arg(long, default_value_t = 100)]
        chunk_size: usize,
        #[arg(long, default_value_t = 0.75)]
        train_frac: f64,
    },
    /// Pooled-vs-per-agent negative-transfer comparison.
    Pooled {
        #[command(flatten)]
        common: AnalyzeCommon,
        /// Rows per agent entering the comparison (default: shortest log).
        #[arg(long)]
        per_agent_n: Option<usize>,
        /// Restrict to one group (e.g. GE).
        #[arg(long)]
        group: Option<Group>,
    },
    /// Cross-agent committed-weight dispersion over GE commit rounds.
    Dispersion {
        #[command(flatten)]
        common: AnalyzeCommon,
    },
    /// One-sided Welch t-test on final follower counts between two groups.
    Ttest {
        /// Log directory produced by `simulate`.
        #[arg(long)]
        logs: PathBuf,
        /// Two comma-separated groups, alternative: second > first.
        #[arg(long, default_value = "UR,GE")]
        groups: String,
    },
}

#[derive(Args)]
struct ReplayArgs {
    /// One agent's JSONL round log.
    #[arg(long)]
    log: PathBuf,
    /// Policy to replay the recorded action sets through.
    #[arg(long)]
    policy: Group,
    /// Expected feature dimension; mismatching logs are rejected.
    #[arg(long)]
    dim: Option<usize>,
    /// Seed for the replayed policy's exploration draws.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
}

#[derive(Args)]
struct SchemaArgs {
    #[arg(long, default_value_t = 87)]
    dim: usize,
    #[arg(long, default_value_t = 280)]
    text_length_cap: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Replay(args) => cmd_replay(args),
        Command::Schema(args) => cmd_schema(args),
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    /// Bad flags, config, or input files — exit 2.
    Usage(String),
    /// Failure after inputs validated — exit 1.
    Runtime(Error),
}

/// Treats any error from loading/validating inputs as a usage error.
fn usage<T>(result: flocksim::Result<T>) -> Result<T, CliError> {
    result.map_err(|e| CliError::Usage(e.to_string()))
}

fn runtime<T>(result: flocksim::Result<T>) -> Result<T, CliError> {
    result.map_err(CliError::Runtime)
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("FLOCKSIM_SEED") {
        Ok(raw) => raw
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("FLOCKSIM_SEED is not a u64: {raw:?}"))),
        Err(_) => Ok(None),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let raw = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut config: ExperimentConfig = serde_json::from_str(&raw)
        .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    if let Some(seed) = args.seed.or(env_seed()?) {
        config.master_seed = seed;
    }
    if let Some(rounds) = args.rounds {
        config.rounds = rounds;
    }
    let config = usage(flocksim::domain::validate_config(config))?;

    let summary = runtime(harness::run_experiment(&config, &args.out))?;
    println!("{} rounds, {} agents -> {}", summary.rounds, summary.agents.len(), args.out.display());
    println!("{:<6} {:>12} {:>12} {:>12}", "group", "mean", "median", "stddev");
    for g in &summary.groups {
        println!("{:<6} {:>12.3} {:>12.3} {:>12.3}", g.group.to_string(), g.mean_final, g.median_final, g.stddev_final);
    }
    Ok(())
}

fn parse_target(raw: &str) -> Result<TargetKind, CliError> {
    match raw {
        "reward" => Ok(TargetKind::Reward),
        "delta" => Ok(TargetKind::FollowerDelta),
        other => Err(CliError::Usage(format!("unknown target {other:?} (reward|delta)"))),
    }
}

fn load_rows(common: &AnalyzeCommon) -> Result<Vec<analysis::AgentRows>, CliError> {
    let target = parse_target(&common.target)?;
    usage(analysis::load_agent_rows(&common.logs, target))
}

fn out_dir(common: &AnalyzeCommon) -> PathBuf {
    common.out.clone().unwrap_or_else(|| common.logs.clone())
}

fn write_csv(path: &Path, header: &str, lines: &[String]) -> Result<(), CliError> {
    let mut body = String::with_capacity(lines.len() * 32 + header.len() + 1);
    body.push_str(header);
    body.push('\n');
    for line in lines {
        body.push_str(line);
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| CliError::Runtime(e.into()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    match args.kind {
        AnalyzeKind::Drift { common, train_n, day_len } => {
            let agents = load_rows(&common)?;
            let fitter = Fitter::Ridge(common.lambda);
            let mut lines = Vec::new();
            for agent in &agents {
                let curve = runtime(analysis::drift_curve(&agent.rows, train_n, day_len, fitter))?;
                for (day, mse) in curve.iter().enumerate() {
                    lines.push(format!("{},{},{:.6}", agent.agent_id, day, mse));
                }
            }
            write_csv(&out_dir(&common).join("drift_curve.csv"), "agent_id,day,mse", &lines)
        }
        AnalyzeKind::Chunks { common, chunk_size, train_frac } => {
            let agents = load_rows(&common)?;
            let fitter = Fitter::Ridge(common.lambda);
            let mut lines = Vec::new();
            for agent in &agents {
                let chunked = runtime(analysis::chunked_mse(&agent.rows, chunk_size, train_frac, fitter))?;
                let all = runtime(analysis::all_data_mse(&agent.rows, train_frac, fitter))?;
                for (c, mse) in chunked.per_chunk.iter().enumerate() {
                    lines.push(format!("{},{},{:.6},{:.6},{:.6}", agent.agent_id, c, mse, chunked.median, all));
                }
                println!("{}: chunk median {:.4}, all-data {:.4}", agent.agent_id, chunked.median, all);
            }
            write_csv(
                &out_dir(&common).join("chunked_mse.csv"),
                "agent_id,chunk,mse,agent_median,all_data_mse",
                &lines,
            )
        }
        AnalyzeKind::Pooled { common, per_agent_n, group } => {
            let agents = load_rows(&common)?;
            let datasets: Vec<Dataset> = agents
                .iter()
                .filter(|a| group.is_none_or(|g| a.group == g))
                .map(|a| a.rows.clone())
                .collect();
            if datasets.is_empty() {
                return Err(CliError::Usage("no agents match the requested group".into()));
            }
            let n = per_agent_n
                .unwrap_or_else(|| datasets.iter().map(Dataset::len).min().unwrap_or(0));
            let fitter = Fitter::Ridge(common.lambda);
            let out = runtime(analysis::pooled_vs_per_agent(&datasets, n, fitter))?;
            println!(
                "per-agent median {:.4}, pooled all {:.4}, pooled window {:.4} ({} rows)",
                out.per_agent_median, out.pooled_all, out.pooled_window, out.pooled_rows
            );
            let line = format!(
                "{:.6},{:.6},{:.6},{}",
                out.per_agent_median, out.pooled_all, out.pooled_window, out.pooled_rows
            );
            write_csv(
                &out_dir(&common).join("pooled.csv"),
                "per_agent_median,pooled_all,pooled_window,pooled_rows",
                &[line],
            )
        }
        AnalyzeKind::Dispersion { common } => {
            let mut logs = Vec::new();
            for path in usage(harness::agent_log_paths(&common.logs))? {
                let records = usage(read_log(&path, None))?;
                if records.first().is_some_and(|r| r.group == Group::GE) {
                    logs.push(records);
                }
            }
            let points = usage(analysis::weight_dispersion(&logs))?;
            let lines: Vec<String> = points
                .iter()
                .map(|p| format!("{},{:.6}", p.round, p.mean_stddev))
                .collect();
            write_csv(&out_dir(&common).join("dispersion.csv"), "round,mean_stddev", &lines)
        }
        AnalyzeKind::Ttest { logs, groups } => {
            let (a, b) = parse_group_pair(&groups)?;
            let finals = |g: Group| -> Result<Vec<f64>, CliError> {
                let mut out = Vec::new();
                for path in usage(harness::agent_log_paths(&logs))? {
                    let records = usage(read_log(&path, None))?;
                    if records.first().is_some_and(|r| r.group == g) {
                        out.push(records.iter().map(|r| r.outcome.delta_agent_followers).sum());
                    }
                }
                if out.is_empty() {
                    return Err(CliError::Usage(format!("no {g} agent logs in {}", logs.display())));
                }
                Ok(out)
            };
            let xs = finals(a)?;
            let ys = finals(b)?;
            let (t, p) = runtime(one_sided_t_test(&xs, &ys))?;
            println!("{b} > {a}: t = {t:.4}, p = {p:.4} (n = {}, {})", xs.len(), ys.len());
            Ok(())
        }
    }
}

fn parse_group_pair(raw: &str) -> Result<(Group, Group), CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("--groups wants two comma-separated groups, got {raw:?}")));
    }
    let parse = |s: &str| s.trim().parse::<Group>().map_err(|e| CliError::Usage(e.to_string()));
    Ok((parse(parts[0])?, parse(parts[1])?))
}

fn cmd_replay(args: ReplayArgs) -> Result<(), CliError> {
    let records = usage(read_log(&args.log, args.dim))?;
    if records.is_empty() {
        println!("0 rounds replayed");
        return Ok(());
    }
    let mut config = ExperimentConfig {
        epsilon: args.epsilon,
        eta: args.eta,
        feature_dim: records[0].candidates[0].dim(),
        ..ExperimentConfig::default()
    };
    if let Some(seed) = args.seed.or(env_seed()?) {
        config.master_seed = seed;
    }
    let mut policy = PolicyState::new(args.policy, &config);
    let mut matched = 0usize;
    let mut selection_counts = vec![0usize; records[0].candidates.len()];
    let mut sq_err_sum = 0.0;
    for record in &records {
        let mut rng = stream(config.master_seed, &record.agent_id, "replay", record.round_index);
        let choice = runtime(policy.select_action(&record.candidates, config.epsilon, &mut rng))?;
        if choice < selection_counts.len() {
            selection_counts[choice] += 1;
        }
        if choice == record.chosen {
            let predicted = runtime(predict(policy.committed(), &record.candidates[choice]))?;
            let err = record.reward - predicted;
            sq_err_sum += err * err;
            matched += 1;
            runtime(policy.observe_outcome(record))?;
        }
    }
    println!("{} rounds replayed, {} matched the logged choice", records.len(), matched);
    if matched > 0 {
        println!("matched-round reward MSE: {:.6}", sq_err_sum / matched as f64);
    }
    let max = selection_counts.iter().copied().max().unwrap_or(0);
    println!("selection counts (max {max}): {selection_counts:?}");
    Ok(())
}

fn cmd_schema(args: SchemaArgs) -> Result<(), CliError> {
    let schema = usage(FeatureSchema::new(args.dim, args.text_length_cap))?;
    println!("{}", schema.to_json());
    Ok(())
}
