//! Reward signals: the agent reward over the chosen tweet's outcome and
//! the adviser reward over poster-side signals of unchosen tweets.

use serde::{Deserialize, Serialize};

use crate::domain::OutcomeObservation;
use crate::error::{Error, Result};

/// Linear reward coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardCoefficients {
    /// Agent reward: (delta agent followers, delta poster followers,
    /// favorites, retweets).
    pub alpha: Vec<f64>,
    /// Adviser reward: (delta poster followers, favorites, retweets).
    pub beta: Vec<f64>,
}

impl Default for RewardCoefficients {
    fn default() -> Self {
        RewardCoefficients {
            alpha: vec![100.0, 10.0, 10.0, 1.0],
            beta: vec![10.0, 10.0, 1.0],
        }
    }
}

/// r = a0 * delta_agent + a1 * delta_poster + a2 * favorites + a3 * retweets.
///
/// Only defined for the chosen tweet's observation; the agent never sees
/// its own follower change for tweets it did not retweet.
pub fn agent_reward(outcome: &OutcomeObservation, coeffs: &RewardCoefficients) -> Result<f64> {
    if !outcome.observed_for_chosen {
        return Err(Error::Validation(
            "agent_reward called on an unchosen-tweet observation".into(),
        ));
    }
    let a = &coeffs.alpha;
    Ok(a[0] * outcome.delta_agent_followers
        + a[1] * outcome.delta_poster_followers
        + a[2] * outcome.favorites
        + a[3] * outcome.retweets)
}

/// r' = b0 * delta_poster + b1 * favorites + b2 * retweets.
///
/// Valid for unchosen tweets; uses only poster-side signals.
pub fn adviser_reward(outcome: &OutcomeObservation, coeffs: &RewardCoefficients) -> f64 {
    let b = &coeffs.beta;
    b[0] * outcome.delta_poster_followers + b[1] * outcome.favorites + b[2] * outcome.retweets
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chosen(da: f64, dp: f64, f: f64, w: f64) -> OutcomeObservation {
        OutcomeObservation {
            delta_agent_followers: da,
            delta_poster_followers: dp,
            favorites: f,
            retweets: w,
            observed_for_chosen: true,
        }
    }

    #[test]
    fn zero_outcome_zero_reward() {
        let c = RewardCoefficients::default();
        assert_eq!(agent_reward(&chosen(0.0, 0.0, 0.0, 0.0), &c).unwrap(), 0.0);
        assert_eq!(adviser_reward(&OutcomeObservation::for_unchosen(0.0, 0.0, 0.0), &c), 0.0);
    }

    #[test]
    fn unit_agent_follower_is_worth_100() {
        let c = RewardCoefficients::default();
        assert_eq!(agent_reward(&chosen(1.0, 0.0, 0.0, 0.0), &c).unwrap(), 100.0);
    }

    #[test]
    fn agent_reward_mixed_case() {
        // 100*1 + 10*2 + 10*3 + 1*4 = 154
        let c = RewardCoefficients::default();
        assert_eq!(agent_reward(&chosen(1.0, 2.0, 3.0, 4.0), &c).unwrap(), 154.0);
    }

    #[test]
    fn adviser_reward_defaults() {
        let c = RewardCoefficients::default();
        assert_eq!(adviser_reward(&OutcomeObservation::for_unchosen(1.0, 0.0, 0.0), &c), 10.0);
        // 10 + 10 + 1 = 21
        assert_eq!(adviser_reward(&OutcomeObservation::for_unchosen(1.0, 1.0, 1.0), &c), 21.0);
    }

    #[test]
    fn agent_reward_rejects_unchosen_observation() {
        let c = RewardCoefficients::default();
        let o = OutcomeObservation::for_unchosen(1.0, 1.0, 1.0);
        assert!(agent_reward(&o, &c).is_err());
    }

    #[test]
    fn reward_is_linear_in_the_outcome() {
        let c = RewardCoefficients::default();
        let o1 = chosen(1.0, 2.0, 3.0, 4.0);
        let o2 = chosen(-2.0, 1.0, 0.5, 2.0);
        let sum = chosen(-1.0, 3.0, 3.5, 6.0);
        let r1 = agent_reward(&o1, &c).unwrap();
        let r2 = agent_reward(&o2, &c).unwrap();
        let rs = agent_reward(&sum, &c).unwrap();
        assert!((rs - (r1 + r2)).abs() < 1e-12);

        let scaled = chosen(3.0, 6.0, 9.0, 12.0);
        assert!((agent_reward(&scaled, &c).unwrap() - 3.0 * r1).abs() < 1e-12);
    }

    #[test]
    fn follower_change_dominates_retweets_100x() {
        let c = RewardCoefficients::default();
        let base = chosen(0.0, 0.0, 0.0, 0.0);
        let bump_follower = chosen(1.0, 0.0, 0.0, 0.0);
        let bump_retweet = chosen(0.0, 0.0, 0.0, 1.0);
        let df = agent_reward(&bump_follower, &c).unwrap() - agent_reward(&base, &c).unwrap();
        let dw = agent_reward(&bump_retweet, &c).unwrap() - agent_reward(&base, &c).unwrap();
        assert_eq!(df, 100.0 * dw);
    }
}
