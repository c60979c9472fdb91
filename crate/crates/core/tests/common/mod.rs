#![allow(dead_code)]

use plural_market::constructions::random::{random_instance, RandomSpec};
use plural_market::game::{
    Game, GameInstance, ProviderRule, ProviderUtility, TieBreak, INSTANCE_SCHEMA_VERSION,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_game(seed: u64, spec: &RandomSpec) -> Game {
    Game::new(random_instance(&mut rng(seed), spec)).expect("generated instances are valid")
}

pub fn random_row<R: Rng>(rng: &mut R, width: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..width)
        .map(|_| {
            if rng.gen_bool(0.7) {
                rng.gen::<f64>()
            } else {
                0.0
            }
        })
        .collect();
    if row.iter().all(|&v| v == 0.0) {
        row[rng.gen_range(0..width)] = 1.0;
    }
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= s);
    row
}

/// Randomized rule fitting provider `j` of `game`.
pub fn random_rule<R: Rng>(rng: &mut R, game: &Game, j: usize) -> ProviderRule {
    let m = game.n_messages();
    ProviderRule::from_fn(game.provider_features[j].len(), m, game.rounds, |_, _| {
        random_row(rng, m)
    })
    .unwrap()
}

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

/// One featureless user and `provider_features.len()` providers; every
/// provider utility is zero. `prior` is flat over `(y, x^P_1, ..)`.
pub fn bare_instance(
    n_states: usize,
    provider_features: &[usize],
    prior: Vec<f64>,
    user_util: Vec<Vec<f64>>,
    n_messages: usize,
    rounds: usize,
) -> GameInstance {
    let na = user_util.len();
    GameInstance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        states: labels("y", n_states),
        user_features: vec![vec!["-".into()]],
        provider_features: provider_features.iter().map(|&n| labels("x", n)).collect(),
        prior,
        action_sets: vec![labels("a", na)],
        user_utils: vec![user_util],
        provider_utils: provider_features
            .iter()
            .map(|_| ProviderUtility::dense(vec![0.0; na * n_states]))
            .collect(),
        message_space: labels("m", n_messages),
        rounds,
        tie_break: TieBreak::default(),
    }
}
