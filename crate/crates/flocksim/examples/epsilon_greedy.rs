//! Show how epsilon controls the explore/exploit split in action
//! selection.
//!
//! A BE (batch) policy is trained on synthetic rounds where candidate 0
//! is clearly the best arm, then the selection distribution over a fixed
//! candidate set is tallied for several epsilon values.
//!
//! ```sh
//! cargo run --release --example epsilon_greedy
//! ```

#![allow(clippy::field_reassign_with_default)]

use flocksim::domain::{
    ExperimentConfig, FeatureVector, Group, OutcomeObservation, RoundRecord,
};
use flocksim::policies::PolicyState;
use flocksim::rng::stream;

fn training_record(round: u64, x: Vec<f64>, reward: f64) -> RoundRecord {
    RoundRecord {
        agent_id: "BE_00".into(),
        group: Group::BE,
        round_index: round,
        candidates: vec![FeatureVector(x)],
        chosen: 0,
        followed_poster: false,
        outcome: OutcomeObservation {
            delta_agent_followers: 0.0,
            delta_poster_followers: 0.0,
            favorites: reward.max(0.0) / 10.0,
            retweets: 0.0,
            observed_for_chosen: true,
        },
        adviser_outcomes: vec![],
        reward,
        adviser_rewards: vec![],
        committed_weights: None,
    }
}

fn main() -> flocksim::Result<()> {
    let mut config = ExperimentConfig::default();
    config.feature_dim = 2;

    // Reward is 10 * x[0] - 5 * x[1]: the policy should learn to prefer
    // high-x[0], low-x[1] candidates.
    let mut policy = PolicyState::new(Group::BE, &config);
    let mut rng = stream(1, "demo", "train", 0);
    for t in 0..200 {
        let x = vec![
            rand::Rng::random::<f64>(&mut rng),
            rand::Rng::random::<f64>(&mut rng),
        ];
        let reward = 10.0 * x[0] - 5.0 * x[1];
        policy.observe_outcome(&training_record(t, x, reward))?;
    }

    let candidates = vec![
        FeatureVector(vec![1.0, 0.0]), // best
        FeatureVector(vec![0.5, 0.0]),
        FeatureVector(vec![1.0, 1.0]),
        FeatureVector(vec![0.0, 0.0]),
    ];

    println!("{:>8} {:>8} {:>8} {:>8} {:>8}", "epsilon", "arm 0", "arm 1", "arm 2", "arm 3");
    for epsilon in [0.0, 0.05, 0.2, 1.0] {
        let mut counts = [0usize; 4];
        for t in 0..10_000u64 {
            let mut rng = stream(2, "demo", "select", t);
            counts[policy.select_action(&candidates, epsilon, &mut rng)?] += 1;
        }
        println!(
            "{epsilon:>8.2} {:>8} {:>8} {:>8} {:>8}",
            counts[0], counts[1], counts[2], counts[3]
        );
    }
    println!("\nwith epsilon = 0 the greedy arm takes every pull; with 1.0 all arms are uniform");
    Ok(())
}
