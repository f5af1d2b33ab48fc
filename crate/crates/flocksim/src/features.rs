//! Feature extraction: the single deterministic path from a candidate
//! (plus the round clock) to a fixed-dimension vector, shared by the
//! simulator and offline replay.
//!
//! Slot 0 is always a constant bias of 1. Count-like inputs go through
//! log1p (normalized by ln(1 + 1e9)) to tame heavy tails; token-count
//! features are capped at [`COUNT_CAP`] and divided by it. Every
//! feature therefore stays in [-1, 1] for any input with counts up to
//! 1e9, which keeps eta = 0.1 SGD steps stable without per-run feature
//! standardization. Slots past the named block are hash buckets of
//! lowercased whitespace tokens, using FNV-1a with a fixed seed so
//! extraction is platform-stable.

use serde::Serialize;
use std::f64::consts::TAU;

use crate::domain::{FeatureVector, TweetCandidate};
use crate::error::{Error, Result};
use crate::rng::fnv1a64;

/// Number of named features before the hash-bucket block.
pub const NAMED_FEATURE_COUNT: usize = 20;

/// Upper cap for raw token-count features (applied before dividing
/// counts by it).
pub const COUNT_CAP: f64 = 25.0;

/// Normalizer for log1p count features: ln(1 + 1e9).
pub fn log_norm() -> f64 {
    (1e9f64).ln_1p()
}

/// Fixed seed for token hashing.
pub const TOKEN_HASH_SEED: u64 = 0x005f_10c5;

const NAMED: [&str; NAMED_FEATURE_COUNT] = [
    "bias",
    "text_length",
    "word_count",
    "hashtag_count",
    "mention_count",
    "url_present",
    "exclamation_count",
    "question_count",
    "uppercase_ratio",
    "digit_ratio",
    "log1p_author_followers",
    "log1p_author_following",
    "log1p_follower_following_ratio",
    "log1p_author_statuses",
    "log1p_account_age_days",
    "verified",
    "log1p_favorites_at_obs",
    "log1p_retweets_at_obs",
    "hour_sin",
    "hour_cos",
];

/// Ordered feature definitions for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSchema {
    dim: usize,
    text_length_cap: usize,
}

#[derive(Serialize)]
struct SchemaEntry {
    name: String,
    index: usize,
}

impl FeatureSchema {
    /// Schema of total dimension `dim`: the named block plus
    /// `dim - NAMED_FEATURE_COUNT` token hash buckets.
    pub fn new(dim: usize, text_length_cap: usize) -> Result<Self> {
        if dim < NAMED_FEATURE_COUNT {
            return Err(Error::Validation(format!(
                "feature dimension {dim} below minimum {NAMED_FEATURE_COUNT}"
            )));
        }
        if text_length_cap == 0 {
            return Err(Error::Validation("text_length_cap must be >= 1".into()));
        }
        Ok(FeatureSchema { dim, text_length_cap })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bucket_count(&self) -> usize {
        self.dim - NAMED_FEATURE_COUNT
    }

    /// Feature names in slot order.
    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = NAMED.iter().map(|s| s.to_string()).collect();
        for b in 0..self.bucket_count() {
            names.push(format!("token_bucket_{b}"));
        }
        names
    }

    /// name -> index map as a JSON string, for documentation dumps.
    pub fn to_json(&self) -> String {
        let entries: Vec<SchemaEntry> = self
            .names()
            .into_iter()
            .enumerate()
            .map(|(index, name)| SchemaEntry { name, index })
            .collect();
        serde_json::to_string_pretty(&entries).expect("schema serializes")
    }

    /// Extracts the feature vector for one candidate.
    pub fn extract(&self, candidate: &TweetCandidate, round_index: u64) -> Result<FeatureVector> {
        let mut v = vec![0.0f64; self.dim];
        let text = &candidate.text;
        let tokens: Vec<&str> = text.split_whitespace().collect();

        v[0] = 1.0;
        v[1] = text.chars().count() as f64 / self.text_length_cap as f64;
        v[2] = (tokens.len() as f64).ln_1p() / log_norm();
        v[3] = capped_count(tokens.iter().filter(|t| t.starts_with('#')).count());
        v[4] = capped_count(tokens.iter().filter(|t| t.starts_with('@')).count());
        v[5] = if tokens
            .iter()
            .any(|t| t.starts_with("http://") || t.starts_with("https://"))
        {
            1.0
        } else {
            0.0
        };
        v[6] = capped_count(text.chars().filter(|c| *c == '!').count());
        v[7] = capped_count(text.chars().filter(|c| *c == '?').count());

        let alphabetic = text.chars().filter(|c| c.is_alphabetic()).count();
        let uppercase = text.chars().filter(|c| c.is_uppercase()).count();
        v[8] = ratio(uppercase, alphabetic);
        let total_chars = text.chars().count();
        let digits = text.chars().filter(|c| c.is_ascii_digit()).count();
        v[9] = ratio(digits, total_chars);

        let author = &candidate.author;
        v[10] = log1p_count(author.follower_count);
        v[11] = log1p_count(author.following_count);
        v[12] = if author.following_count > 0 {
            (author.follower_count as f64 / author.following_count as f64).ln_1p() / log_norm()
        } else {
            0.0
        };
        v[13] = log1p_count(author.status_count);
        v[14] = log1p_count(author.account_age_days);
        v[15] = if author.verified { 1.0 } else { 0.0 };
        v[16] = log1p_count(candidate.favorites_at_obs);
        v[17] = log1p_count(candidate.retweets_at_obs);

        let hour = (round_index % 24) as f64 / 24.0;
        v[18] = (TAU * hour).sin();
        v[19] = (TAU * hour).cos();

        let buckets = self.bucket_count();
        if buckets > 0 {
            let mut counts = vec![0usize; buckets];
            for token in &tokens {
                let lower = token.to_lowercase();
                let bucket = (fnv1a64(TOKEN_HASH_SEED, lower.as_bytes()) % buckets as u64) as usize;
                counts[bucket] += 1;
            }
            for (b, count) in counts.into_iter().enumerate() {
                v[NAMED_FEATURE_COUNT + b] = capped_count(count);
            }
        }

        let out = FeatureVector(v);
        if !out.is_finite() {
            return Err(Error::NonFinite("extracted feature vector".into()));
        }
        Ok(out)
    }
}

fn capped_count(n: usize) -> f64 {
    (n as f64).min(COUNT_CAP) / COUNT_CAP
}

fn log1p_count(n: u64) -> f64 {
    (n as f64).ln_1p() / log_norm()
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
