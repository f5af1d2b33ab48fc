//! Shared data types of the experiment: candidates, observations, round
//! logs, and the run configuration.

use serde::{Deserialize, Serialize};

use crate::environment::EnvParams;
use crate::error::{Error, Result};
use crate::reward::RewardCoefficients;

/// Agent group, i.e. which algorithm controls the account.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    /// Uniform random baseline; no learning.
    UR,
    /// Incremental gradient estimator with an adviser.
    GE,
    /// Batch estimator refit on its full history every round.
    BE,
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Group::UR => write!(f, "UR"),
            Group::GE => write!(f, "GE"),
            Group::BE => write!(f, "BE"),
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "UR" => Ok(Group::UR),
            "GE" => Ok(Group::GE),
            "BE" => Ok(Group::BE),
            other => Err(Error::Validation(format!("unknown group {other:?}"))),
        }
    }
}

/// Metadata of the user that posted a candidate status update.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub follower_count: u64,
    pub following_count: u64,
    pub status_count: u64,
    pub account_age_days: u64,
    pub verified: bool,
}

/// One retweetable status update — the bandit action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TweetCandidate {
    pub id: String,
    pub text: String,
    pub author: AuthorProfile,
    /// Round index at which the candidate was sampled.
    pub created_at: u64,
    pub favorites_at_obs: u64,
    pub retweets_at_obs: u64,
}

/// Fixed-dimension real feature vector describing a candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Delayed environment response to one candidate, one round later.
///
/// Fields are reals so that expectation mode (every draw replaced by its
/// mean) fits the same type; in sampling mode they carry integer values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeObservation {
    /// Change in the agent's own follower count. Only defined for the
    /// chosen tweet; always 0.0 for unchosen candidates.
    pub delta_agent_followers: f64,
    /// Change in the poster's follower count.
    pub delta_poster_followers: f64,
    pub favorites: f64,
    pub retweets: f64,
    pub observed_for_chosen: bool,
}

impl OutcomeObservation {
    /// Observation for an unchosen candidate: poster-side signals only.
    pub fn for_unchosen(delta_poster: f64, favorites: f64, retweets: f64) -> Self {
        OutcomeObservation {
            delta_agent_followers: 0.0,
            delta_poster_followers: delta_poster,
            favorites,
            retweets,
            observed_for_chosen: false,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.favorites < 0.0 || self.retweets < 0.0 {
            return Err(Error::Validation(
                "favorites and retweets must be non-negative".into(),
            ));
        }
        if !self.observed_for_chosen && self.delta_agent_followers != 0.0 {
            return Err(Error::Validation(
                "unchosen observation carries an agent-follower delta".into(),
            ));
        }
        Ok(())
    }
}

/// Full log of one agent round, one JSON object per line on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub agent_id: String,
    pub group: Group,
    pub round_index: u64,
    /// Features of all K candidates, in sampling order.
    pub candidates: Vec<FeatureVector>,
    /// Index of the retweeted candidate.
    pub chosen: usize,
    pub followed_poster: bool,
    /// Outcome for the chosen tweet.
    pub outcome: OutcomeObservation,
    /// Outcomes for the unchosen candidates, in ascending candidate
    /// index order (chosen index skipped).
    pub adviser_outcomes: Vec<OutcomeObservation>,
    /// Agent reward for the chosen tweet.
    pub reward: f64,
    /// Adviser rewards, aligned with `adviser_outcomes`.
    pub adviser_rewards: Vec<f64>,
    /// Committed hypothesis snapshot, present on GE commit rounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub committed_weights: Option<Vec<f64>>,
}

impl RoundRecord {
    pub fn check(&self) -> Result<()> {
        if self.chosen >= self.candidates.len() {
            return Err(Error::Validation(format!(
                "chosen index {} out of range for {} candidates",
                self.chosen,
                self.candidates.len()
            )));
        }
        self.outcome.check()?;
        for o in &self.adviser_outcomes {
            o.check()?;
        }
        Ok(())
    }
}

/// Full experiment configuration; read from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub n_agents_per_group: usize,
    pub groups: Vec<Group>,
    /// Rounds per agent (T). One round models one hour.
    pub rounds: u64,
    /// Candidates per round (K).
    pub actions_per_round: usize,
    /// Feature dimension (D).
    pub feature_dim: usize,
    pub epsilon: f64,
    /// SGD learning rate (eta).
    pub eta: f64,
    /// GE takes a learning step every this many rounds.
    pub commit_interval: u64,
    /// Probability of following the poster of the chosen tweet.
    pub follow_probability: f64,
    pub reward: RewardCoefficients,
    /// Weight of the adviser hypothesis in the GE blend.
    pub adviser_blend_weight: f64,
    /// Batch fitter used by BE agents: "ols" (default) or "ridge".
    pub be_fitter: BatchFitterKind,
    /// Maximum candidate text length in characters.
    pub text_length_cap: usize,
    pub environment: EnvParams,
    /// Run agents on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

/// Which batch trainer BE agents use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchFitterKind {
    Ols,
    Ridge { lambda: f64 },
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 0,
            n_agents_per_group: 20,
            groups: vec![Group::UR, Group::GE, Group::BE],
            rounds: 650,
            actions_per_round: 50,
            feature_dim: 87,
            epsilon: 0.05,
            eta: 0.1,
            commit_interval: 8,
            follow_probability: 0.5,
            reward: RewardCoefficients::default(),
            adviser_blend_weight: 0.5,
            be_fitter: BatchFitterKind::Ols,
            text_length_cap: 280,
            environment: EnvParams::default(),
            parallel: true,
        }
    }
}

/// Checks every config invariant; returns the config unchanged on
/// success, otherwise a descriptive error naming the violated field.
pub fn validate_config(config: ExperimentConfig) -> Result<ExperimentConfig> {
    let c = &config;
    if !(0.0..=1.0).contains(&c.epsilon) {
        return Err(Error::Validation("epsilon out of range [0, 1]".into()));
    }
    if c.eta <= 0.0 || !c.eta.is_finite() {
        return Err(Error::Validation("eta must be positive and finite".into()));
    }
    if c.reward.alpha.len() != 4 {
        return Err(Error::Validation("alpha must have 4 coefficients".into()));
    }
    if c.reward.beta.len() != 3 {
        return Err(Error::Validation("beta must have 3 coefficients".into()));
    }
    if c.actions_per_round < 2 {
        return Err(Error::Validation("actions_per_round must be >= 2".into()));
    }
    if c.n_agents_per_group < 1 {
        return Err(Error::Validation("n_agents_per_group must be >= 1".into()));
    }
    if c.groups.is_empty() {
        return Err(Error::Validation("groups must be non-empty".into()));
    }
    if c.feature_dim < crate::features::NAMED_FEATURE_COUNT {
        return Err(Error::Validation(format!(
            "feature_dim must be >= {}",
            crate::features::NAMED_FEATURE_COUNT
        )));
    }
    if c.commit_interval < 1 {
        return Err(Error::Validation("commit_interval must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&c.follow_probability) {
        return Err(Error::Validation("follow_probability out of range [0, 1]".into()));
    }
    if !(0.0..=1.0).contains(&c.adviser_blend_weight) {
        return Err(Error::Validation(
            "adviser_blend_weight out of range [0, 1]".into(),
        ));
    }
    if let BatchFitterKind::Ridge { lambda } = c.be_fitter {
        if lambda < 0.0 || lambda.is_nan() {
            return Err(Error::Validation("be_fitter ridge lambda must be >= 0".into()));
        }
    }
    if c.text_length_cap == 0 {
        return Err(Error::Validation("text_length_cap must be >= 1".into()));
    }
    c.environment.check()?;
    Ok(config)
}

/// True iff the text predicate accepts the candidate's text. The default
/// filter accepts everything; a real offensive-language filter plugs in
/// here.
pub fn candidate_is_admissible<F>(candidate: &TweetCandidate, filter: F) -> bool
where
    F: Fn(&str) -> bool,
{
    filter(&candidate.text)
}

/// Accept-all text predicate.
pub fn accept_all(_text: &str) -> bool {
    true
}
