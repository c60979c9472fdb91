mod common;

use approx::assert_abs_diff_eq;
use common::{random_game, rng};
use plural_market::alignment::{check_strong, check_weak, StrongAlignmentCert};
use plural_market::constructions::random::{random_strong_aligned, RandomSpec};
use plural_market::constructions::{
    augment, make_full_revelation_rule, make_identity_elicitation_rule, make_no_disclosure_rule,
    make_public_adding_users, make_public_adding_users_base, make_public_example,
    make_strict_separation, public_adding_users_spec, strict_separation_weak_cert,
};
use plural_market::equilibrium::{
    benchmark_shared, deterministic_rule_space, is_user_dominant, GarblingSpec,
};
use plural_market::game::{user_utility_against, Game, GameInstance, ProviderRule};
use plural_market::Error;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn public_example_rejects_the_boundary() {
    assert!(matches!(
        make_public_example(0.1, 0.5, 5, 2.0),
        Err(Error::ParameterViolation(_))
    ));
    assert!(make_public_example(0.1, 0.5, 6, 2.0).is_ok());
    assert!(matches!(
        make_public_example(0.5, 0.5, 6, 2.0),
        Err(Error::ParameterViolation(_))
    ));
    assert!(matches!(
        make_public_example(0.1, 0.5, 6, 1.0),
        Err(Error::ParameterViolation(_))
    ));
}

#[test]
fn generated_instances_round_trip_through_json() {
    for inst in [
        make_public_example(0.1, 0.5, 6, 2.0).unwrap(),
        make_strict_separation(),
        make_public_adding_users(),
    ] {
        inst.validate().unwrap();
        let back = GameInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back, inst);
    }
}

#[test]
fn strict_witness_corners_force_half() {
    let game = Game::new(make_strict_separation()).unwrap();
    // a = (1, 1): provider 0 earns 1 at y = (1, 0) and 0 at y = (0, 1)
    let table = game.provider_table(0);
    let cell = game.profile_index(&[1, 1], 0);
    assert_abs_diff_eq!(table[cell], 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(table[cell + 1], 0.0, epsilon = 1e-15);
    // user utilities do not separate the two states, so any combination is constant there
    for i in 0..2 {
        assert_eq!(game.user_utils[i][1][0], game.user_utils[i][1][1]);
    }
    let r = check_weak(&game, &strict_separation_weak_cert()).unwrap();
    assert_eq!((r.eps_p, r.eps_u), (0.0, 0.0));
}

#[test]
fn adding_users_game_is_the_stated_augmentation() {
    let base = make_public_adding_users_base();
    let aug = augment(&base, &public_adding_users_spec()).unwrap();
    assert_eq!(aug, make_public_adding_users());
    let game = Game::new(aug).unwrap();
    // 1/4 1[a_1 = y] + 1/6 1[a_1 = ⊥] + 1/2 1[a_2 = ⊥]
    let table = game.provider_table(0);
    for a1 in 0..3 {
        for a2 in 0..3 {
            for y in 0..2 {
                let expect =
                    0.25 * f64::from(a1 == y) + f64::from(a1 == 2) / 6.0 + 0.5 * f64::from(a2 == 2);
                assert_abs_diff_eq!(
                    table[game.profile_index(&[a1, a2], y)],
                    expect,
                    epsilon = 1e-15
                );
            }
        }
    }
}

#[test]
fn tiny_beta_barely_moves_the_provider() {
    let base = make_public_adding_users_base();
    let mut spec = public_adding_users_spec();
    spec.betas = vec![1e-9];
    let game = Game::new(augment(&base, &spec).unwrap()).unwrap();
    let old = Game::new(base).unwrap().provider_table(0).to_vec();
    let new = game.provider_table(0);
    for a1 in 0..3 {
        for a2 in 0..3 {
            for y in 0..2 {
                assert!((new[game.profile_index(&[a1, a2], y)] - old[a1 * 2 + y]).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn augmentation_rejects_bad_parameters() {
    let base = make_public_adding_users_base();
    let mut spec = public_adding_users_spec();
    spec.betas = vec![1.0];
    assert!(matches!(
        augment(&base, &spec),
        Err(Error::ParameterViolation(_))
    ));
    let mut spec = public_adding_users_spec();
    spec.perturbations[0][0][0] = 1.5;
    assert!(matches!(
        augment(&base, &spec),
        Err(Error::ParameterViolation(_))
    ));
}

#[test]
fn augmented_residual_is_bounded_by_the_mix() {
    let base = make_public_adding_users_base();
    let spec = public_adding_users_spec();
    let beta = spec.betas[0];
    let game = Game::new(augment(&base, &spec).unwrap()).unwrap();
    // base cert: lambda = 1/2, eps = 0; the new user gets no weight, f's midpoint goes to the intercept
    let cert = StrongAlignmentCert {
        providers: vec![0],
        weights: vec![vec![(1.0 - beta) * 0.5, 0.0]],
        intercepts: vec![beta * 0.5],
        eps: 0.0,
    };
    let eps = check_strong(&game, &cert).unwrap();
    assert_abs_diff_eq!(eps, beta * 0.5, epsilon = 1e-15);
    assert!(eps <= (1.0 - beta) * 0.0 + beta * 1.0);
}

#[test]
fn revelation_gives_each_user_c() {
    let game = Game::new(make_public_example(0.1, 0.5, 6, 2.0).unwrap()).unwrap();
    for j in 0..2 {
        let rule = make_full_revelation_rule(&game, j).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(
                user_utility_against(&game, i, &rule, j).unwrap(),
                0.5,
                epsilon = 1e-12
            );
        }
    }
}

#[test]
fn rule_constructors_check_message_space() {
    let mut inst = make_public_example(0.1, 0.5, 6, 2.0).unwrap();
    inst.message_space.truncate(3);
    let game = Game::new(inst).unwrap();
    assert!(matches!(
        make_full_revelation_rule(&game, 0),
        Err(Error::MessageSpaceTooSmall {
            needed: 6,
            available: 3
        })
    ));
    let g = GarblingSpec::identical_features(&game, &[0, 1]).unwrap();
    assert!(matches!(
        make_identity_elicitation_rule(&game, 0, &g),
        Err(Error::NotApplicable(_))
    ));
    let mut two = make_public_example(0.1, 0.5, 6, 2.0).unwrap();
    two.message_space.truncate(1);
    two.rounds = 2;
    let game = Game::new(two).unwrap();
    let g = GarblingSpec::identical_features(&game, &[0, 1]).unwrap();
    assert!(matches!(
        make_identity_elicitation_rule(&game, 0, &g),
        Err(Error::MessageSpaceTooSmall { needed: 2, .. })
    ));
}

#[test]
fn identical_users_see_identical_branches() {
    let mut inst = make_public_adding_users();
    inst.rounds = 2;
    let game = Game::new(inst).unwrap();
    let g = GarblingSpec::identical_features(&game, &[0]).unwrap();
    let rule = make_identity_elicitation_rule(&game, 0, &g).unwrap();
    for x in 0..2 {
        for tail in 0..2 {
            assert_eq!(
                rule.row(x, &[0, 0]).unwrap()[tail],
                rule.row(x, &[0, 1]).unwrap()[tail]
            );
        }
    }
}

/// The elicitation rule with the user's reply replaced by `branch`.
fn forced_branch(rule: &ProviderRule, branch: usize) -> ProviderRule {
    ProviderRule::from_fn(
        rule.n_features(),
        rule.n_messages(),
        rule.rounds(),
        |x, h| {
            if h.is_empty() {
                rule.row(x, h).unwrap().to_vec()
            } else {
                let mut p = h.to_vec();
                p[1] = branch;
                rule.row(x, &p).unwrap().to_vec()
            }
        },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn declaring_her_own_branch_is_optimal(seed in any::<u64>()) {
        let a = random_strong_aligned(&mut rng(seed), 3, 3);
        let mut inst = a.instance;
        inst.rounds = 2;
        let game = Game::new(inst).unwrap();
        let rule = make_identity_elicitation_rule(&game, 0, &a.garbling).unwrap();
        for i in 0..game.n_users() {
            let best = user_utility_against(&game, i, &rule, 0).unwrap();
            let truthful = user_utility_against(&game, i, &forced_branch(&rule, i), 0).unwrap();
            prop_assert!((best - truthful).abs() <= 1e-12);
            let bench = benchmark_shared(&game, i, &a.garbling, 1).unwrap();
            prop_assert!((truthful - bench).abs() <= 1e-12);
        }
    }

    #[test]
    fn revelation_dominates_every_deterministic_rule(seed in any::<u64>()) {
        let spec = RandomSpec { max_provider_features: 3, n_messages: 3, ..RandomSpec::default() };
        let game = random_game(seed, &spec);
        for j in 0..2 {
            let rev = make_full_revelation_rule(&game, j).unwrap();
            let all = deterministic_rule_space(&game, j).unwrap();
            prop_assert!(is_user_dominant(&game, j, &rev, &all).unwrap());
        }
    }

    #[test]
    fn augment_keeps_base_users_bit_for_bit(seed in any::<u64>(), beta in 0.01f64..0.99) {
        let mut r = rng(seed);
        let base = random_game(seed, &RandomSpec::default()).into_instance();
        let ny = base.n_states();
        let mut spec = public_adding_users_spec();
        spec.user_util = (0..3).map(|_| (0..ny).map(|_| r.gen::<f64>()).collect()).collect();
        spec.feature_given_state = vec![vec![1.0]; ny];
        spec.betas = vec![beta, 1.0 - beta];
        spec.perturbations = (0..2).map(|_| (0..3).map(|_| (0..ny).map(|_| r.gen::<f64>()).collect()).collect()).collect();
        let aug = augment(&base, &spec).unwrap();
        prop_assert_eq!(&aug.user_utils[..2], &base.user_utils[..]);
        prop_assert_eq!(&aug.action_sets[..2], &base.action_sets[..]);
        Game::new(aug).unwrap();
    }

    #[test]
    fn uninformative_revelation_gives_the_prior_value(seed in any::<u64>()) {
        let mut inst = random_game(seed, &RandomSpec::default()).into_instance();
        let ny = inst.n_states();
        let py: Vec<f64> = (0..ny).map(|y| inst.prior.chunks(inst.prior.len() / ny).nth(y).unwrap().iter().sum()).collect();
        inst.user_features = vec![vec!["-".into()]; 2];
        inst.provider_features = vec![vec!["h".into(), "t".into()], vec!["-".into()]];
        inst.prior = py.iter().flat_map(|p| [0.5 * p, 0.5 * p]).collect();
        let game = Game::new(inst).unwrap();
        let rev = make_full_revelation_rule(&game, 0).unwrap();
        let nd = make_no_disclosure_rule(&game, 0).unwrap();
        for i in 0..2 {
            let prior_best = game.user_utils[i]
                .iter()
                .map(|row| row.iter().zip(&py).map(|(u, p)| u * p).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((user_utility_against(&game, i, &rev, 0).unwrap() - prior_best).abs() <= 1e-12);
            prop_assert!((user_utility_against(&game, i, &nd, 0).unwrap() - prior_best).abs() <= 1e-12);
        }
    }
}
