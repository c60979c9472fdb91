//! Seeded random instances for property tests and sweeps.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::alignment::{StrongAlignmentCert, WeakAlignmentCert};
use crate::equilibrium::GarblingSpec;
use crate::game::{one_hot, GameInstance, ProviderUtility, TieBreak, INSTANCE_SCHEMA_VERSION};

/// Shape of a generic random instance. Sizes are inclusive upper bounds.
#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub n_users: usize,
    pub n_providers: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub max_user_features: usize,
    pub max_provider_features: usize,
    pub n_messages: usize,
    pub rounds: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            n_users: 2,
            n_providers: 2,
            max_states: 3,
            max_actions: 3,
            max_user_features: 2,
            max_provider_features: 3,
            n_messages: 2,
            rounds: 1,
        }
    }
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

fn unit_table<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

/// A dense random game with correlated features and arbitrary utilities.
pub fn random_instance<R: Rng>(rng: &mut R, spec: &RandomSpec) -> GameInstance {
    let ny = rng.gen_range(2..=spec.max_states.max(2));
    let ux: Vec<usize> = (0..spec.n_users)
        .map(|_| rng.gen_range(1..=spec.max_user_features.max(1)))
        .collect();
    let px: Vec<usize> = (0..spec.n_providers)
        .map(|_| rng.gen_range(1..=spec.max_provider_features.max(1)))
        .collect();
    let total: usize = ny * ux.iter().product::<usize>() * px.iter().product::<usize>();
    let mut prior: Vec<f64> = (0..total)
        .map(|_| {
            if rng.gen_bool(0.6) {
                rng.gen::<f64>()
            } else {
                0.0
            }
        })
        .collect();
    if prior.iter().all(|&p| p == 0.0) {
        prior[0] = 1.0;
    }
    let s: f64 = prior.iter().sum();
    prior.iter_mut().for_each(|p| *p /= s);
    let na: Vec<usize> = (0..spec.n_users)
        .map(|_| rng.gen_range(2..=spec.max_actions.max(2)))
        .collect();
    let profiles: usize = na.iter().product::<usize>() * ny;
    GameInstance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        states: labels("y", ny),
        user_features: ux.iter().map(|&n| labels("u", n)).collect(),
        provider_features: px.iter().map(|&n| labels("p", n)).collect(),
        prior,
        action_sets: na.iter().map(|&n| labels("a", n)).collect(),
        user_utils: na.iter().map(|&n| unit_table(rng, n, ny)).collect(),
        provider_utils: (0..spec.n_providers)
            .map(|_| ProviderUtility::dense((0..profiles).map(|_| rng.gen::<f64>()).collect()))
            .collect(),
        message_space: labels("m", spec.n_messages),
        rounds: spec.rounds,
        tie_break: TieBreak::default(),
    }
}

/// A two-provider game with an explicit common garbling, together with an
/// alignment certificate of one of the two kinds.
#[derive(Clone, Debug)]
pub struct AlignedInstance<C> {
    pub instance: GameInstance,
    pub cert: C,
    pub garbling: GarblingSpec,
}

/// Provider 0 sees `y`, provider 1 sees a random coarsening of `y`; the
/// garbling is that coarsening. Users see nothing. `|M| = |Y|`.
struct InfoStructure {
    ny: usize,
    n_classes: usize,
    prior: Vec<f64>,
    garbling: GarblingSpec,
}

fn info_structure<R: Rng>(rng: &mut R, max_states: usize) -> InfoStructure {
    let ny = rng.gen_range(2..=max_states.max(2));
    let n_classes = rng.gen_range(1..=ny);
    // surjective coarsening
    let mut coarse: Vec<usize> = (0..ny)
        .map(|y| {
            if y < n_classes {
                y
            } else {
                rng.gen_range(0..n_classes)
            }
        })
        .collect();
    coarse.shuffle(rng);
    let py: Vec<f64> = (0..ny).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = py.iter().sum();
    // prior dims (y, u0, u1, p0, p1) with singleton user features
    let mut prior = vec![0.0; ny * ny * n_classes];
    for y in 0..ny {
        prior[(y * ny + y) * n_classes + coarse[y]] = py[y] / s;
    }
    let garbling = GarblingSpec {
        labels: labels("z", n_classes),
        providers: vec![0, 1],
        maps: vec![
            (0..ny).map(|y| one_hot(n_classes, coarse[y])).collect(),
            (0..n_classes).map(|z| one_hot(n_classes, z)).collect(),
        ],
        reference: (0..ny).map(|y| one_hot(n_classes, coarse[y])).collect(),
    };
    InfoStructure {
        ny,
        n_classes,
        prior,
        garbling,
    }
}

fn skeleton(info: &InfoStructure, na: &[usize]) -> GameInstance {
    GameInstance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        states: labels("y", info.ny),
        user_features: vec![vec!["-".into()]; na.len()],
        provider_features: vec![labels("y", info.ny), labels("z", info.n_classes)],
        prior: info.prior.clone(),
        action_sets: na.iter().map(|&n| labels("a", n)).collect(),
        user_utils: Vec::new(),
        provider_utils: Vec::new(),
        message_space: labels("m", info.ny),
        rounds: 1,
        tie_break: TieBreak::default(),
    }
}

/// Two users, two providers, `|Y| <= max_states`, `|A_i| <= max_actions`, one
/// round, exactly weakly aligned over both providers.
pub fn random_weak_aligned<R: Rng>(
    rng: &mut R,
    max_states: usize,
    max_actions: usize,
) -> AlignedInstance<WeakAlignmentCert> {
    let info = info_structure(rng, max_states);
    let n = 2;
    let na: Vec<usize> = (0..n)
        .map(|_| rng.gen_range(2..=max_actions.max(2)))
        .collect();
    let components: Vec<Vec<Vec<Vec<f64>>>> = (0..2)
        .map(|_| na.iter().map(|&a| unit_table(rng, a, info.ny)).collect())
        .collect();
    let lambdas: Vec<Vec<f64>> = (0..2)
        .map(|_| {
            (0..n)
                .map(|_| rng.gen_range(0.05..=1.0 / n as f64))
                .collect()
        })
        .collect();
    let mut user_weights = vec![vec![0.0; n]; 2];
    for i in 0..n {
        let keep = rng.gen_range(0..3); // 0: both, 1: only provider 0, 2: only provider 1
        let raw: Vec<f64> = (0..2)
            .map(|t| {
                if keep == 0 || keep == t + 1 {
                    rng.gen_range(0.1..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let scale = rng.gen_range(0.3..1.0) / raw.iter().sum::<f64>();
        for t in 0..2 {
            user_weights[t][i] = raw[t] * scale;
        }
    }
    let mut instance = skeleton(&info, &na);
    instance.user_utils = (0..n)
        .map(|i| {
            (0..na[i])
                .map(|a| {
                    (0..info.ny)
                        .map(|y| {
                            (0..2)
                                .map(|t| user_weights[t][i] * components[t][i][a][y])
                                .sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    instance.provider_utils = (0..2)
        .map(|t| ProviderUtility::separable(lambdas[t].clone(), components[t].clone(), 0.0))
        .collect();
    AlignedInstance {
        instance,
        cert: WeakAlignmentCert {
            providers: vec![0, 1],
            components,
            provider_weights: lambdas,
            provider_intercepts: vec![0.0; 2],
            user_weights,
            user_intercepts: vec![0.0; n],
            eps_p: 0.0,
            eps_u: 0.0,
        },
        garbling: info.garbling,
    }
}

/// Two users, two providers, one round; each provider's utility is a positive
/// combination of the users' utilities. Full revelation is always feasible.
pub fn random_strong_aligned<R: Rng>(
    rng: &mut R,
    max_states: usize,
    max_actions: usize,
) -> AlignedInstance<StrongAlignmentCert> {
    let info = info_structure(rng, max_states);
    let n = 2;
    let na: Vec<usize> = (0..n)
        .map(|_| rng.gen_range(2..=max_actions.max(2)))
        .collect();
    let user_utils: Vec<Vec<Vec<f64>>> = na.iter().map(|&a| unit_table(rng, a, info.ny)).collect();
    let lambdas: Vec<Vec<f64>> = (0..2)
        .map(|_| {
            (0..n)
                .map(|_| rng.gen_range(0.05..=1.0 / n as f64))
                .collect()
        })
        .collect();
    let mut instance = skeleton(&info, &na);
    instance.provider_utils = lambdas
        .iter()
        .map(|l| ProviderUtility::separable(l.clone(), user_utils.clone(), 0.0))
        .collect();
    instance.user_utils = user_utils;
    AlignedInstance {
        instance,
        cert: StrongAlignmentCert {
            providers: vec![0, 1],
            weights: lambdas,
            intercepts: vec![0.0; 2],
            eps: 0.0,
        },
        garbling: info.garbling,
    }
}
