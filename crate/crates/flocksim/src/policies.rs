//! The three agent algorithms and the epsilon-greedy selection rule.
//!
//! UR selects uniformly and never learns. GE branches a candidate
//! hypothesis off the committed one each round via a single SGD step,
//! feeds the adviser with modified rewards of the unchosen tweets, and
//! every commit interval averages the pending candidates and blends in
//! the adviser's ridge fit. BE appends the chosen row to its full
//! history and refits a batch estimator after every round; an OLS
//! divergence keeps the previous hypothesis and is counted instead of
//! crashing the run.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::domain::{BatchFitterKind, ExperimentConfig, FeatureVector, Group, RoundRecord};
use crate::error::{Error, Result};
use crate::estimators::{
    average_hypotheses, blend, predict, sgd_step, Dataset, Hypothesis, NormalEquations,
};

/// Ridge strength of the GE adviser's batch fit. Keeps the adviser
/// solvable on early, small datasets.
pub const ADVISER_RIDGE_LAMBDA: f64 = 1e-3;

/// What `observe_outcome` did beyond the routine bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct ObserveEffect {
    /// New committed weights, present when GE committed or BE refit
    /// successfully.
    pub committed_snapshot: Option<Vec<f64>>,
    /// True when a batch refit hit the divergence fallback.
    pub divergence_fallback: bool,
}

/// Learner state of one agent.
#[derive(Clone, Debug)]
pub struct PolicyState {
    kind: Group,
    committed: Hypothesis,
    /// GE: candidate hypotheses since the last commit (branch, not
    /// chained).
    pending: Vec<Hypothesis>,
    /// GE: adviser normal equations over all (unchosen x, adviser
    /// reward) rows seen so far.
    adviser: NormalEquations,
    /// BE: full chosen-tweet history.
    history: Dataset,
    history_eq: NormalEquations,
    divergence_events: u64,
    eta: f64,
    commit_interval: u64,
    blend_weight: f64,
    be_fitter: BatchFitterKind,
}

impl PolicyState {
    pub fn new(kind: Group, config: &ExperimentConfig) -> Self {
        let dim = config.feature_dim;
        PolicyState {
            kind,
            committed: Hypothesis::zeros(dim),
            pending: Vec::new(),
            adviser: NormalEquations::new(dim),
            history: Dataset::new(dim),
            history_eq: NormalEquations::new(dim),
            divergence_events: 0,
            eta: config.eta,
            commit_interval: config.commit_interval,
            blend_weight: config.adviser_blend_weight,
            be_fitter: config.be_fitter,
        }
    }

    pub fn kind(&self) -> Group {
        self.kind
    }

    pub fn committed(&self) -> &Hypothesis {
        &self.committed
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn divergence_events(&self) -> u64 {
        self.divergence_events
    }

    /// Epsilon-greedy action selection. One uniform draw decides
    /// exploration; exploitation is the argmax of the committed
    /// hypothesis over the candidates, ties broken by lowest index. UR
    /// always selects uniformly regardless of epsilon.
    pub fn select_action(
        &self,
        candidates: &[FeatureVector],
        epsilon: f64,
        rng: &mut ChaCha12Rng,
    ) -> Result<usize> {
        if candidates.is_empty() {
            return Err(Error::EmptyInput("empty candidate list".into()));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Validation("epsilon out of range [0, 1]".into()));
        }
        if self.kind == Group::UR {
            return Ok(rng.random_range(0..candidates.len()));
        }
        let explore: f64 = rng.random();
        if explore < epsilon {
            return Ok(rng.random_range(0..candidates.len()));
        }
        let mut best = 0;
        let mut best_value = predict(&self.committed, &candidates[0])?;
        for (i, x) in candidates.iter().enumerate().skip(1) {
            let value = predict(&self.committed, x)?;
            if value > best_value {
                best = i;
                best_value = value;
            }
        }
        Ok(best)
    }

    /// Digests one completed round.
    pub fn observe_outcome(&mut self, record: &RoundRecord) -> Result<ObserveEffect> {
        record.check()?;
        match self.kind {
            Group::UR => Ok(ObserveEffect::default()),
            Group::GE => self.observe_ge(record),
            Group::BE => self.observe_be(record),
        }
    }

    fn observe_ge(&mut self, record: &RoundRecord) -> Result<ObserveEffect> {
        let x_chosen = &record.candidates[record.chosen];
        let candidate = sgd_step(&self.committed, x_chosen, record.reward, self.eta)?;
        self.pending.push(candidate);

        let unchosen = record
            .candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != record.chosen)
            .map(|(_, x)| x);
        for (x, &r_adv) in unchosen.zip(&record.adviser_rewards) {
            self.adviser.add_row(x.as_slice(), r_adv)?;
        }

        if self.pending.len() as u64 == self.commit_interval {
            let agent_side = average_hypotheses(&self.pending)?;
            let adviser_side = self.adviser.solve_ridge(ADVISER_RIDGE_LAMBDA)?;
            self.committed = blend(&agent_side, &adviser_side, self.blend_weight)?;
            self.pending.clear();
            return Ok(ObserveEffect {
                committed_snapshot: Some(self.committed.weights.clone()),
                divergence_fallback: false,
            });
        }
        Ok(ObserveEffect::default())
    }

    fn observe_be(&mut self, record: &RoundRecord) -> Result<ObserveEffect> {
        let x = &record.candidates[record.chosen];
        self.history.push(x.as_slice(), record.reward)?;
        self.history_eq.add_row(x.as_slice(), record.reward)?;

        // underdetermined, not divergent: wait until dim rows exist
        if self.history.len() < self.history.dim() {
            return Ok(ObserveEffect::default());
        }
        let refit = match self.be_fitter {
            BatchFitterKind::Ols => self.history_eq.solve_ols(),
            BatchFitterKind::Ridge { lambda } => self.history_eq.solve_ridge(lambda),
        };
        match refit {
            Ok(h) => {
                self.committed = h;
                Ok(ObserveEffect {
                    committed_snapshot: Some(self.committed.weights.clone()),
                    divergence_fallback: false,
                })
            }
            Err(Error::Divergence(_)) => {
                // keep the previous hypothesis, count the event
                self.divergence_events += 1;
                Ok(ObserveEffect {
                    committed_snapshot: None,
                    divergence_fallback: true,
                })
            }
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::OutcomeObservation;
    use crate::rng::stream;

    fn config(dim: usize) -> ExperimentConfig {
        ExperimentConfig {
            feature_dim: dim,
            ..Default::default()
        }
    }

    fn record_for(
        kind: Group,
        round: u64,
        candidates: Vec<FeatureVector>,
        chosen: usize,
        reward: f64,
    ) -> RoundRecord {
        let k = candidates.len();
        RoundRecord {
            agent_id: format!("{kind}_00"),
            group: kind,
            round_index: round,
            candidates,
            chosen,
            followed_poster: false,
            outcome: OutcomeObservation {
                observed_for_chosen: true,
                ..Default::default()
            },
            adviser_outcomes: vec![OutcomeObservation::for_unchosen(0.0, 0.0, 0.0); k - 1],
            reward,
            adviser_rewards: vec![0.0; k - 1],
            committed_weights: None,
        }
    }

    #[test]
    fn greedy_argmax_and_tie_break() {
        let mut cfg = config(2);
        cfg.epsilon = 0.0;
        let mut policy = PolicyState::new(Group::GE, &cfg);
        policy.committed = Hypothesis { weights: vec![1.0, 0.0] };
        let mut rng = stream(0, "a", "select", 0);
        let candidates = vec![
            FeatureVector(vec![0.1, 0.0]),
            FeatureVector(vec![0.9, 0.0]),
            FeatureVector(vec![0.5, 0.0]),
        ];
        assert_eq!(policy.select_action(&candidates, 0.0, &mut rng).unwrap(), 1);

        let tied = vec![
            FeatureVector(vec![0.2, 0.0]),
            FeatureVector(vec![0.7, 0.0]),
            FeatureVector(vec![0.7, 0.0]),
        ];
        assert_eq!(policy.select_action(&tied, 0.0, &mut rng).unwrap(), 1);
    }

    #[test]
    fn empty_candidate_list_is_rejected() {
        let policy = PolicyState::new(Group::UR, &config(2));
        let mut rng = stream(0, "a", "select", 0);
        assert!(policy.select_action(&[], 0.5, &mut rng).is_err());
    }

    #[test]
    fn zero_epsilon_selection_is_deterministic() {
        let cfg = config(3);
        let mut policy = PolicyState::new(Group::BE, &cfg);
        policy.committed = Hypothesis { weights: vec![0.3, -1.0, 0.5] };
        let candidates: Vec<FeatureVector> = (0..10)
            .map(|i| FeatureVector(vec![1.0, i as f64 * 0.1, (i % 3) as f64]))
            .collect();
        let picks: Vec<usize> = (0..5)
            .map(|r| {
                let mut rng = stream(9, "a", "select", r);
                policy.select_action(&candidates, 0.0, &mut rng).unwrap()
            })
            .collect();
        assert!(picks.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn ur_never_learns() {
        let cfg = config(2);
        let mut policy = PolicyState::new(Group::UR, &cfg);
        let record = record_for(
            Group::UR,
            0,
            vec![FeatureVector(vec![1.0, 0.0]), FeatureVector(vec![1.0, 1.0])],
            0,
            42.0,
        );
        let effect = policy.observe_outcome(&record).unwrap();
        assert!(effect.committed_snapshot.is_none());
        assert_eq!(policy.committed().weights, vec![0.0, 0.0]);
        assert_eq!(policy.history_len(), 0);
        assert_eq!(policy.pending_len(), 0);
    }

    #[test]
    fn ge_commit_after_eight_identical_rounds() {
        // x = e1, r = 1, eta = 0.1, blend weight 0: every candidate
        // hypothesis branches from committed w = 0, so the average after
        // 8 rounds is 0.1 * e1.
        let mut cfg = config(3);
        cfg.adviser_blend_weight = 0.0;
        let mut policy = PolicyState::new(Group::GE, &cfg);
        let candidates = vec![
            FeatureVector(vec![0.0, 1.0, 0.0]),
            FeatureVector(vec![1.0, 0.0, 0.0]),
        ];
        for round in 0..8 {
            let record = record_for(Group::GE, round, candidates.clone(), 0, 1.0);
            let effect = policy.observe_outcome(&record).unwrap();
            if round < 7 {
                assert!(effect.committed_snapshot.is_none());
                assert_eq!(policy.committed().weights, vec![0.0; 3]);
                assert_eq!(policy.pending_len(), round as usize + 1);
            } else {
                assert!(effect.committed_snapshot.is_some());
            }
        }
        let w = &policy.committed().weights;
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 0.1).abs() < 1e-15, "w1 = {}", w[1]);
        assert_eq!(w[2], 0.0);
        assert_eq!(policy.pending_len(), 0);
    }

    #[test]
    fn ge_committed_changes_only_on_commit_rounds() {
        let mut cfg = config(2);
        cfg.adviser_blend_weight = 0.5;
        let mut policy = PolicyState::new(Group::GE, &cfg);
        let candidates = vec![
            FeatureVector(vec![1.0, 0.5]),
            FeatureVector(vec![1.0, -0.5]),
        ];
        for round in 0..24 {
            let before = policy.committed().clone();
            let record = record_for(Group::GE, round, candidates.clone(), 0, 2.0);
            policy.observe_outcome(&record).unwrap();
            let changed = policy.committed() != &before;
            assert_eq!(changed, (round + 1) % cfg.commit_interval == 0, "round {round}");
            assert!(policy.pending_len() < cfg.commit_interval as usize);
        }
    }

    #[test]
    fn ge_with_full_adviser_weight_ignores_chosen_rewards_between_commits() {
        let mut cfg = config(2);
        cfg.adviser_blend_weight = 1.0;
        let run = |chosen_reward: f64| {
            let mut policy = PolicyState::new(Group::GE, &cfg);
            let candidates = vec![
                FeatureVector(vec![1.0, 0.5]),
                FeatureVector(vec![1.0, -0.5]),
            ];
            for round in 0..8 {
                let mut record = record_for(Group::GE, round, candidates.clone(), 0, chosen_reward);
                record.adviser_rewards = vec![3.0];
                policy.observe_outcome(&record).unwrap();
            }
            policy.committed().clone()
        };
        assert_eq!(run(1.0), run(100.0));
    }

    #[test]
    fn be_history_grows_by_one_per_round() {
        let cfg = config(2);
        let mut policy = PolicyState::new(Group::BE, &cfg);
        for round in 0..5 {
            let record = record_for(
                Group::BE,
                round,
                vec![
                    FeatureVector(vec![1.0, round as f64]),
                    FeatureVector(vec![1.0, -1.0]),
                ],
                0,
                round as f64,
            );
            policy.observe_outcome(&record).unwrap();
            assert_eq!(policy.history_len(), round as usize + 1);
        }
    }

    #[test]
    fn be_recovers_exact_linear_reward() {
        // noiseless r = w* . x with more independent samples than dims
        let mut cfg = config(3);
        cfg.feature_dim = 3;
        let w_star = [2.0, -1.0, 0.5];
        let mut policy = PolicyState::new(Group::BE, &cfg);
        let mut rng = stream(3, "be", "gen", 0);
        for round in 0..12 {
            let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let reward: f64 = x.iter().zip(&w_star).map(|(a, b)| a * b).sum();
            let record = record_for(
                Group::BE,
                round,
                vec![FeatureVector(x), FeatureVector(vec![0.0; 3])],
                0,
                reward,
            );
            policy.observe_outcome(&record).unwrap();
        }
        for (w, expected) in policy.committed().weights.iter().zip(&w_star) {
            assert!((w - expected).abs() < 1e-8, "{w} vs {expected}");
        }
        assert_eq!(policy.divergence_events(), 0);
    }

    #[test]
    fn be_collinear_features_hit_the_divergence_fallback() {
        let cfg = config(2);
        let mut policy = PolicyState::new(Group::BE, &cfg);
        for round in 0..4 {
            // second coordinate duplicates the first
            let v = round as f64 + 1.0;
            let record = record_for(
                Group::BE,
                round,
                vec![FeatureVector(vec![v, v]), FeatureVector(vec![0.0, 0.0])],
                0,
                v,
            );
            let effect = policy.observe_outcome(&record).unwrap();
            // round 0 is the underdetermined warmup, no refit attempt yet
            assert_eq!(effect.divergence_fallback, round >= 1);
        }
        assert_eq!(policy.divergence_events(), 3);
        // previous hypothesis (zero init) retained
        assert_eq!(policy.committed().weights, vec![0.0, 0.0]);
    }

    #[test]
    fn be_ridge_fitter_survives_collinear_features() {
        let mut cfg = config(2);
        cfg.be_fitter = BatchFitterKind::Ridge { lambda: 1e-3 };
        let mut policy = PolicyState::new(Group::BE, &cfg);
        for round in 0..4 {
            let v = round as f64 + 1.0;
            let record = record_for(
                Group::BE,
                round,
                vec![FeatureVector(vec![v, v]), FeatureVector(vec![0.0, 0.0])],
                0,
                v,
            );
            let effect = policy.observe_outcome(&record).unwrap();
            assert!(!effect.divergence_fallback);
        }
        assert_eq!(policy.divergence_events(), 0);
    }
}
