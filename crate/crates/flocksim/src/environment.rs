//! Synthetic nonstationary social stream.
//!
//! Each agent owns a latent audience weight vector theta_i(t). A
//! candidate's engagement level g drives Poisson engagement counts and
//! sparse Bernoulli follower events. Random-walk drift of theta is the
//! source of nonstationarity; per-agent offsets of theta are the source
//! of negative cross-agent transfer.
//!
//! The response model is synthetic by construction: logistic engagement
//! keeps follower gains rare, while the `Linear` curve makes the
//! expectation-mode reward an exact linear function of the features,
//! which the stationarity tests rely on.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, LogNormal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::domain::{AuthorProfile, FeatureVector, OutcomeObservation, RoundRecord, TweetCandidate};
use crate::error::{Error, Result};
use crate::rng::{global_stream, stream};

/// Engagement base rates and follower-event probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResponseRates {
    pub lambda_fav: f64,
    pub lambda_rt: f64,
    pub lambda_poster: f64,
    pub p_gain: f64,
    pub p_unfollow: f64,
    pub p_reciprocal: f64,
}

impl Default for ResponseRates {
    fn default() -> Self {
        ResponseRates {
            lambda_fav: 2.0,
            lambda_rt: 1.0,
            lambda_poster: 0.5,
            p_gain: 0.05,
            p_unfollow: 0.01,
            p_reciprocal: 0.1,
        }
    }
}

/// Shape of the engagement curve g(x).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseCurve {
    /// g = sigmoid(theta . x/|x|). Default.
    Logistic,
    /// g = 0.5 + theta . x, unnormalized. Makes the expectation-mode
    /// reward an exact linear function of x while g stays positive
    /// (rates are clamped at 0 otherwise).
    Linear,
}

/// Environment parameters, part of the experiment config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvParams {
    /// Random-walk drift scale sigma of the latent audience weights.
    pub drift_sigma: f64,
    /// Heterogeneity scale delta: per-agent offset of theta from the
    /// shared base.
    pub heterogeneity_delta: f64,
    /// Target norm of the shared base audience vector.
    pub base_weight_scale: f64,
    pub rates: ResponseRates,
    /// Replace every random draw by its mean (deterministic testing).
    pub expectation_mode: bool,
    pub response_curve: ResponseCurve,
    /// Rounds at which theta is re-drawn (abrupt drift).
    pub changepoint_rounds: Vec<u64>,
    /// Topic word the candidate stream is sampled around.
    pub topic: String,
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams {
            drift_sigma: 0.01,
            heterogeneity_delta: 0.2,
            base_weight_scale: 8.0,
            rates: ResponseRates::default(),
            expectation_mode: false,
            response_curve: ResponseCurve::Logistic,
            changepoint_rounds: Vec::new(),
            topic: "baseball".into(),
        }
    }
}

impl EnvParams {
    pub fn check(&self) -> Result<()> {
        let r = &self.rates;
        for (name, v) in [
            ("drift_sigma", self.drift_sigma),
            ("heterogeneity_delta", self.heterogeneity_delta),
            ("base_weight_scale", self.base_weight_scale),
            ("lambda_fav", r.lambda_fav),
            ("lambda_rt", r.lambda_rt),
            ("lambda_poster", r.lambda_poster),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be >= 0 and finite")));
            }
        }
        for (name, p) in [
            ("p_gain", r.p_gain),
            ("p_unfollow", r.p_unfollow),
            ("p_reciprocal", r.p_reciprocal),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!("{name} out of range [0, 1]")));
            }
        }
        if self.topic.is_empty() {
            return Err(Error::Validation("topic must be non-empty".into()));
        }
        Ok(())
    }
}

const WORDS: [&str; 28] = [
    "game", "season", "team", "fans", "win", "loss", "score", "league", "playoffs", "pitcher",
    "catcher", "inning", "homerun", "stadium", "draft", "trade", "coach", "rookie", "series",
    "tickets", "tonight", "highlights", "stats", "bullpen", "dugout", "umpire", "mvp", "champs",
];
const MENTIONS: [&str; 4] = ["@mlb", "@espn", "@fanzone", "@sportsdesk"];

/// Mostly pool words, occasionally the configured topic itself.
fn pick_word<'a>(topic: &'a str, rng: &mut ChaCha12Rng) -> &'a str {
    if rng.random::<f64>() < 0.15 {
        topic
    } else {
        WORDS[rng.random_range(0..WORDS.len())]
    }
}

/// Per-agent latent audience state plus the sampling side of the
/// environment.
#[derive(Clone, Debug)]
pub struct AgentEnvironment {
    /// Current audience weights theta_i(t).
    theta: Vec<f64>,
    /// Shared base (kept for changepoint redraws).
    base: Vec<f64>,
    params: EnvParams,
    dim: usize,
}

impl AgentEnvironment {
    /// Builds the agent's audience: theta_i(0) = theta_base + delta * u_i
    /// with u_i uniform on the unit sphere. theta_base depends only on
    /// the master seed; u_i only on (master seed, agent id).
    pub fn new(master_seed: u64, agent_id: &str, dim: usize, params: EnvParams) -> Result<Self> {
        params.check()?;
        let mut base_rng = global_stream(master_seed, "theta_base");
        let scale = params.base_weight_scale / (dim as f64).sqrt();
        let base: Vec<f64> = (0..dim)
            .map(|_| scale * rand::Rng::sample::<f64, _>(&mut base_rng, StandardNormal))
            .collect();
        let mut agent_rng = stream(master_seed, agent_id, "audience", 0);
        let theta = offset_theta(&base, params.heterogeneity_delta, &mut agent_rng);
        Ok(AgentEnvironment { theta, base, params, dim })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    /// Engagement level g for one candidate feature vector.
    pub fn engagement(&self, x: &FeatureVector) -> f64 {
        match self.params.response_curve {
            ResponseCurve::Logistic => {
                let norm = x.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
                let s = if norm > 0.0 {
                    dot(&self.theta, x.as_slice()) / norm
                } else {
                    0.0
                };
                1.0 / (1.0 + (-s).exp())
            }
            ResponseCurve::Linear => 0.5 + dot(&self.theta, x.as_slice()),
        }
    }

    /// Samples the round's action set: k candidates with distinct ids,
    /// author profiles from a log-normal popularity distribution, and
    /// texts synthesized from a seeded token pool around the topic word.
    pub fn sample_action_set(
        &self,
        round_index: u64,
        k: usize,
        rng: &mut ChaCha12Rng,
    ) -> Result<Vec<TweetCandidate>> {
        if k < 2 {
            return Err(Error::Validation("action set size k must be >= 2".into()));
        }
        let followers = LogNormal::new(200f64.ln(), 1.5).expect("valid lognormal");
        let following = LogNormal::new(150f64.ln(), 1.0).expect("valid lognormal");
        let statuses = LogNormal::new(500f64.ln(), 1.2).expect("valid lognormal");
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let author = AuthorProfile {
                follower_count: followers.sample(rng) as u64,
                following_count: following.sample(rng) as u64,
                status_count: statuses.sample(rng) as u64,
                account_age_days: rng.random_range(10..3000),
                verified: rng.random::<f64>() < 0.02,
            };
            let text = self.synthesize_text(rng);
            out.push(TweetCandidate {
                id: format!("r{round_index}_c{i}"),
                text,
                author,
                created_at: round_index,
                favorites_at_obs: sample_poisson(2.0, rng) as u64,
                retweets_at_obs: sample_poisson(1.0, rng) as u64,
            });
        }
        Ok(out)
    }

    fn synthesize_text(&self, rng: &mut ChaCha12Rng) -> String {
        let n_tokens = rng.random_range(4..=12);
        let mut tokens: Vec<String> = Vec::with_capacity(n_tokens);
        for _ in 0..n_tokens {
            let roll: f64 = rng.random();
            let token = if roll < 0.12 {
                format!("#{}", pick_word(&self.params.topic, rng))
            } else if roll < 0.18 {
                MENTIONS[rng.random_range(0..MENTIONS.len())].to_string()
            } else if roll < 0.22 {
                format!("https://t.co/{:06x}", rng.random_range(0u32..0xffffff))
            } else {
                let mut w = pick_word(&self.params.topic, rng).to_string();
                if rng.random::<f64>() < 0.05 {
                    w = w.to_uppercase();
                }
                if rng.random::<f64>() < 0.10 {
                    w.push('!');
                } else if rng.random::<f64>() < 0.05 {
                    w.push('?');
                }
                w
            };
            tokens.push(token);
        }
        tokens.join(" ")
    }

    /// Delayed community response for the chosen candidate and
    /// poster-side responses for the unchosen ones.
    ///
    /// Draw order per candidate is fixed: favorites, retweets, poster
    /// delta, then (chosen only) gain, unfollow, reciprocal-follow.
    pub fn respond(
        &self,
        chosen: &FeatureVector,
        unchosen: &[&FeatureVector],
        followed_poster: bool,
        rng: &mut ChaCha12Rng,
    ) -> Result<(OutcomeObservation, Vec<OutcomeObservation>)> {
        if !chosen.is_finite() || unchosen.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("respond features".into()));
        }
        let r = &self.params.rates;
        let expectation = self.params.expectation_mode;

        let g = self.engagement(chosen);
        let favorites = poisson_or_mean(r.lambda_fav * g, expectation, rng);
        let retweets = poisson_or_mean(r.lambda_rt * g, expectation, rng);
        let delta_poster = poisson_or_mean(r.lambda_poster * g, expectation, rng);
        let gain = bernoulli_or_mean(r.p_gain * g, expectation, rng);
        let unfollow = bernoulli_or_mean(r.p_unfollow, expectation, rng);
        let reciprocal = if followed_poster {
            bernoulli_or_mean(r.p_reciprocal, expectation, rng)
        } else {
            0.0
        };
        let chosen_outcome = OutcomeObservation {
            delta_agent_followers: gain - unfollow + reciprocal,
            delta_poster_followers: delta_poster,
            favorites,
            retweets,
            observed_for_chosen: true,
        };

        let mut others = Vec::with_capacity(unchosen.len());
        for x in unchosen {
            let g = self.engagement(x);
            let favorites = poisson_or_mean(r.lambda_fav * g, expectation, rng);
            let retweets = poisson_or_mean(r.lambda_rt * g, expectation, rng);
            let delta_poster = poisson_or_mean(r.lambda_poster * g, expectation, rng);
            others.push(OutcomeObservation::for_unchosen(delta_poster, favorites, retweets));
        }
        Ok((chosen_outcome, others))
    }

    /// Random-walk drift: theta += sigma/sqrt(D) * xi, xi standard
    /// normal per coordinate.
    pub fn drift_step(&mut self, rng: &mut ChaCha12Rng) {
        if self.params.drift_sigma == 0.0 {
            return;
        }
        let step = self.params.drift_sigma / (self.dim as f64).sqrt();
        for t in self.theta.iter_mut() {
            *t += step * rand::Rng::sample::<f64, _>(rng, StandardNormal);
        }
    }

    /// Abrupt drift: re-draw theta around the base if `round_index` is a
    /// configured changepoint.
    pub fn maybe_changepoint(&mut self, round_index: u64, rng: &mut ChaCha12Rng) {
        if self.params.changepoint_rounds.contains(&round_index) {
            self.theta = offset_theta(&self.base, self.params.heterogeneity_delta, rng);
        }
    }
}

fn offset_theta(base: &[f64], delta: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    // delta * (uniform point on the unit sphere)
    let u: Vec<f64> = (0..base.len())
        .map(|_| rand::Rng::sample::<f64, _>(rng, StandardNormal))
        .collect();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    base.iter().zip(&u).map(|(b, ui)| b + delta * ui / norm).collect()
}

fn sample_poisson(rate: f64, rng: &mut ChaCha12Rng) -> f64 {
    if rate <= 0.0 {
        0.0
    } else {
        Poisson::new(rate).expect("positive rate").sample(rng)
    }
}

fn poisson_or_mean(rate: f64, expectation: bool, rng: &mut ChaCha12Rng) -> f64 {
    let rate = rate.max(0.0);
    if expectation {
        rate
    } else {
        sample_poisson(rate, rng)
    }
}

fn bernoulli_or_mean(p: f64, expectation: bool, rng: &mut ChaCha12Rng) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if expectation {
        p
    } else {
        if rng.random::<f64>() < p {
            1.0
        } else {
            0.0
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Streaming reader over a JSONL round log; yields records in file
/// order and reports malformed lines by line number.
pub struct ReplayReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
    expected_dim: Option<usize>,
}

impl ReplayReader<BufReader<File>> {
    pub fn open(path: &Path, expected_dim: Option<usize>) -> Result<Self> {
        let file = File::open(path)?;
        Ok(ReplayReader::new(BufReader::new(file), expected_dim))
    }
}

impl<R: BufRead> ReplayReader<R> {
    pub fn new(reader: R, expected_dim: Option<usize>) -> Self {
        ReplayReader { lines: reader.lines(), line_no: 0, expected_dim }
    }

    /// Next recorded round, or `None` at end of stream.
    pub fn replay_next(&mut self) -> Option<Result<RoundRecord>> {
        loop {
            self.line_no += 1;
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            if line.trim().is_empty() {
                continue;
            }
            let record: RoundRecord = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(e) => {
                    return Some(Err(Error::LogParse {
                        line: self.line_no,
                        message: e.to_string(),
                    }))
                }
            };
            if let Some(dim) = self.expected_dim {
                if let Some(bad) = record.candidates.iter().find(|c| c.dim() != dim) {
                    return Some(Err(Error::LogParse {
                        line: self.line_no,
                        message: format!(
                            "feature dimension {} does not match configured {dim}",
                            bad.dim()
                        ),
                    }));
                }
            }
            if let Err(e) = record.check() {
                return Some(Err(Error::LogParse { line: self.line_no, message: e.to_string() }));
            }
            return Some(Ok(record));
        }
    }
}

impl<R: BufRead> Iterator for ReplayReader<R> {
    type Item = Result<RoundRecord>;
    fn next(&mut self) -> Option<Self::Item> {
        self.replay_next()
    }
}

/// Reads a whole JSONL round log into memory.
pub fn read_log(path: &Path, expected_dim: Option<usize>) -> Result<Vec<RoundRecord>> {
    ReplayReader::open(path, expected_dim)?.collect()
}
