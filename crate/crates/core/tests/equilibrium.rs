mod common;

use approx::assert_abs_diff_eq;
use common::{bare_instance, random_game, rng};
use itertools::Itertools;
use plural_market::alignment::{AlignmentCert, StrongAlignmentCert};
use plural_market::constructions::random::{random_strong_aligned, RandomSpec};
use plural_market::constructions::{
    make_full_revelation_rule, make_no_disclosure_rule, make_public_adding_users,
    make_public_adding_users_base, make_public_example, public_adding_users_base_cert,
    public_example_weak_cert,
};
use plural_market::equilibrium::{
    benchmark_by_enumeration, benchmark_shared, delta_r, delta_slack, deterministic_rule_space,
    enumerate_pure_equilibria, theoretical_bounds, validate_garbling, verify_anonymous_ne,
    verify_personalized_ne, BoundKind, DeviationClass, GameMode, GarblingSpec, SweepOptions,
};
use plural_market::game::{induced_joint, Game, Profile, ProviderRule, ProviderUtility};
use plural_market::Error;
use proptest::prelude::*;

fn tiny_spec() -> RandomSpec {
    RandomSpec {
        max_states: 2,
        max_actions: 2,
        max_user_features: 1,
        max_provider_features: 2,
        n_messages: 2,
        ..RandomSpec::default()
    }
}

fn provider_utility(game: &Game, rules: &[ProviderRule], j: usize) -> f64 {
    induced_joint(game, &Profile::Anonymous(rules.to_vec()))
        .unwrap()
        .provider_utilities[j]
}

/// Largest gain of each provider over its deterministic rules, by direct re-evaluation.
fn gain_oracle(game: &Game, rules: &[ProviderRule]) -> Vec<f64> {
    (0..game.n_providers())
        .map(|j| {
            let base = provider_utility(game, rules, j);
            deterministic_rule_space(game, j)
                .unwrap()
                .into_iter()
                .map(|r| {
                    let mut dev = rules.to_vec();
                    dev[j] = r;
                    provider_utility(game, &dev, j) - base
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn no_disclosure_survives_every_signal_map() {
    let game = Game::new(make_public_example(0.2, 0.5, 3, 2.0).unwrap()).unwrap();
    let nd = Profile::Anonymous(vec![
        make_no_disclosure_rule(&game, 0).unwrap(),
        make_no_disclosure_rule(&game, 1).unwrap(),
    ]);
    let report = verify_anonymous_ne(
        &game,
        &nd,
        &DeviationClass::Deterministic,
        SweepOptions::default(),
    )
    .unwrap();
    assert!(report.is_eps_ne);
    assert_eq!(report.deviations_checked, vec![27, 27]);
    let eqs = enumerate_pure_equilibria(
        &game,
        &DeviationClass::Deterministic,
        GameMode::Anonymous,
        SweepOptions::default(),
    )
    .unwrap();
    assert!(eqs.iter().any(|e| e.profile == nd));
    let bench = benchmark_shared(
        &game,
        0,
        &GarblingSpec::identical_features(&game, &[0, 1]).unwrap(),
        1,
    )
    .unwrap();
    assert_abs_diff_eq!(bench, 0.5, epsilon = 1e-12);
    assert!(report.user_utilities[0] < bench);
}

#[test]
fn a_lone_revealer_invites_deviation() {
    let game = Game::new(make_public_example(0.2, 0.5, 3, 2.0).unwrap()).unwrap();
    let mixed = Profile::Anonymous(vec![
        make_no_disclosure_rule(&game, 0).unwrap(),
        make_full_revelation_rule(&game, 1).unwrap(),
    ]);
    let report = verify_anonymous_ne(
        &game,
        &mixed,
        &DeviationClass::Deterministic,
        SweepOptions::default(),
    )
    .unwrap();
    assert!(!report.is_eps_ne);
    let w = report.witness.expect("a profitable deviation");
    assert!(w.gain > 0.0);
    let rev = Profile::Anonymous(vec![
        make_full_revelation_rule(&game, 0).unwrap(),
        make_full_revelation_rule(&game, 1).unwrap(),
    ]);
    assert!(
        verify_anonymous_ne(
            &game,
            &rev,
            &DeviationClass::Deterministic,
            SweepOptions::default()
        )
        .unwrap()
        .is_eps_ne
    );
}

#[test]
fn withholding_is_optimal_with_a_second_user() {
    let game = Game::new(make_public_adding_users()).unwrap();
    let nd = make_no_disclosure_rule(&game, 0).unwrap();
    let out = induced_joint(&game, &Profile::Anonymous(vec![nd.clone()])).unwrap();
    assert_abs_diff_eq!(out.provider_utilities[0], 2.0 / 3.0, epsilon = 1e-12);
    let rev = make_full_revelation_rule(&game, 0).unwrap();
    let out = induced_joint(&game, &Profile::Anonymous(vec![rev])).unwrap();
    assert_abs_diff_eq!(out.provider_utilities[0], 0.25, epsilon = 1e-12);
    let report = verify_anonymous_ne(
        &game,
        &Profile::Anonymous(vec![nd]),
        &DeviationClass::Deterministic,
        SweepOptions::default(),
    )
    .unwrap();
    assert!(report.is_eps_ne);
    let bench = benchmark_shared(
        &game,
        0,
        &GarblingSpec::identical_features(&game, &[0]).unwrap(),
        1,
    )
    .unwrap();
    assert_abs_diff_eq!(bench, 1.0, epsilon = 1e-12);
}

#[test]
fn aligned_single_provider_reveals_with_zero_regret() {
    let game = Game::new(make_public_adding_users_base()).unwrap();
    let rev = Profile::Anonymous(vec![make_full_revelation_rule(&game, 0).unwrap()]);
    let report = verify_anonymous_ne(
        &game,
        &rev,
        &DeviationClass::Deterministic,
        SweepOptions::default(),
    )
    .unwrap();
    assert!(report.is_eps_ne);
    assert!(report.max_gain[0] <= 1e-12);
}

#[test]
fn constant_provider_utility_has_no_regret() {
    let mut inst = make_public_example(0.2, 0.5, 3, 2.0).unwrap();
    let cells = inst.action_dims().iter().product::<usize>() * inst.n_states();
    inst.provider_utils = vec![ProviderUtility::dense(vec![0.7; cells]); 2];
    let game = Game::new(inst).unwrap();
    let eqs = enumerate_pure_equilibria(
        &game,
        &DeviationClass::Deterministic,
        GameMode::Anonymous,
        SweepOptions::default(),
    )
    .unwrap();
    assert_eq!(eqs.len(), 27 * 27);
    assert!(eqs
        .iter()
        .all(|e| e.report.max_gain.iter().all(|&g| g.abs() <= 1e-12)));
}

#[test]
fn enumeration_is_refused_past_the_cap() {
    let game = Game::new(make_public_example(0.1, 0.5, 6, 2.0).unwrap()).unwrap();
    let err = enumerate_pure_equilibria(
        &game,
        &DeviationClass::Deterministic,
        GameMode::Anonymous,
        SweepOptions::default(),
    );
    assert!(matches!(err, Err(Error::SearchSpaceTooLarge { .. })));
}

#[test]
fn personalized_no_disclosure_is_broken_by_targeting() {
    let game = Game::new(make_public_example(0.2, 0.5, 3, 2.0).unwrap()).unwrap();
    let nd: Vec<Vec<ProviderRule>> = (0..2)
        .map(|j| vec![make_no_disclosure_rule(&game, j).unwrap(); 2])
        .collect();
    let report = verify_personalized_ne(
        &game,
        &Profile::Personalized(nd),
        &DeviationClass::Deterministic,
        SweepOptions::default(),
    )
    .unwrap();
    assert_eq!(report.deviations_checked, vec![27 * 27, 27 * 27]);
    assert!(!report.is_eps_ne);
    // informing one user while the other still abstains
    assert_abs_diff_eq!(report.max_gain[0], 1.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn garbling_examples_validate() {
    let game = Game::new(make_public_example(0.1, 0.5, 6, 2.0).unwrap()).unwrap();
    let same = GarblingSpec::identical_features(&game, &[0, 1]).unwrap();
    let check = validate_garbling(&game, &[0, 1], &same).unwrap();
    assert!(check.passed);
    assert_eq!(check.max_violation, 0.0);
    assert!(
        validate_garbling(&game, &[0, 1], &GarblingSpec::trivial(&game, &[0, 1]))
            .unwrap()
            .passed
    );
    let mut broken = same.clone();
    broken.reference.swap(0, 1);
    assert!(!validate_garbling(&game, &[0, 1], &broken).unwrap().passed);
}

#[test]
fn coordinate_subsets_share_their_intersection() {
    // y = (c0, c1, c2) uniform; provider 0 sees (c0, c1), provider 1 sees (c1, c2)
    let mut prior = vec![0.0; 8 * 4 * 4];
    for y in 0..8 {
        let (c0, c1, c2) = (y >> 2, (y >> 1) & 1, y & 1);
        prior[(y * 4 + (c0 * 2 + c1)) * 4 + (c1 * 2 + c2)] = 1.0 / 8.0;
    }
    let util = (0..2)
        .map(|a| {
            (0..8)
                .map(|y| if (y >> 1) & 1 == a { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let game = Game::new(bare_instance(8, &[4, 4], prior, util, 2, 1)).unwrap();
    let g = GarblingSpec::from_coordinate_subsets(
        &game,
        &[0, 1],
        &[2, 2, 2],
        &[vec![0, 1], vec![1, 2]],
    )
    .unwrap();
    assert_eq!(g.n_values(), 2);
    assert!(validate_garbling(&game, &[0, 1], &g).unwrap().passed);
    // the user only cares about c1, which is common
    assert_abs_diff_eq!(
        benchmark_shared(&game, 0, &g, 1).unwrap(),
        1.0,
        epsilon = 1e-12
    );
}

#[test]
fn exact_certificates_give_zero_slack() {
    let game = Game::new(make_public_example(0.1, 0.5, 6, 2.0).unwrap()).unwrap();
    let cert = AlignmentCert::Weak(public_example_weak_cert(0.1, 0.5, 6, 2.0).unwrap());
    let garbling = GarblingSpec::identical_features(&game, &[0, 1]).unwrap();
    let bounds = theoretical_bounds(
        &game,
        &cert,
        BoundKind::Personalized,
        &garbling,
        &DeviationClass::Deterministic,
    )
    .unwrap();
    for b in bounds {
        assert_eq!(b.slack, 0.0);
        assert_abs_diff_eq!(b.bound, 0.5, epsilon = 1e-12);
    }
    let base = Game::new(make_public_adding_users_base()).unwrap();
    let strong = AlignmentCert::Strong(public_adding_users_base_cert());
    let g = GarblingSpec::identical_features(&base, &[0]).unwrap();
    let b = theoretical_bounds(
        &base,
        &strong,
        BoundKind::AnonymousDominant,
        &g,
        &DeviationClass::Deterministic,
    )
    .unwrap();
    assert_abs_diff_eq!(b[0].bound, b[0].benchmark, epsilon = 0.0);
}

#[test]
fn anonymous_slack_is_two_eps_over_lambda() {
    let base = Game::new(make_public_adding_users_base()).unwrap();
    let mut cert = public_adding_users_base_cert();
    cert.eps = 0.01;
    let g = GarblingSpec::identical_features(&base, &[0]).unwrap();
    let b = theoretical_bounds(
        &base,
        &AlignmentCert::Strong(cert),
        BoundKind::AnonymousDominant,
        &g,
        &DeviationClass::Deterministic,
    )
    .unwrap();
    assert_abs_diff_eq!(b[0].slack, 0.04, epsilon = 1e-15);
}

#[test]
fn delta_slack_matches_the_formula() {
    let cert = StrongAlignmentCert {
        providers: vec![0, 1],
        weights: vec![vec![0.5, 0.25], vec![0.0, 1.0]],
        intercepts: vec![0.0, 0.0],
        eps: 0.1,
    };
    let d = delta_slack(&cert, &[0.2, 0.4]).unwrap();
    assert_abs_diff_eq!(d[0], 0.2 * 0.25 / 0.5 + 0.2 / 0.5, epsilon = 1e-15);
    let via0: f64 = 0.2 * 0.5 / 0.25 + 0.2 / 0.25;
    let via1 = 0.0 + 0.2;
    assert_abs_diff_eq!(d[1], via0.min(via1), epsilon = 1e-15);
}

#[test]
fn one_round_delta_against_the_prior() {
    let game = Game::new(make_public_example(0.2, 0.5, 3, 2.0).unwrap()).unwrap();
    let g = GarblingSpec::identical_features(&game, &[0, 1]).unwrap();
    // best rule reveals y: 0.5 against a prior-only value of 0.2
    let d = delta_r(&game, 0, &g, &DeviationClass::Deterministic).unwrap();
    assert_abs_diff_eq!(d, 0.3, epsilon = 1e-12);
}

#[test]
fn elicitation_bound_needs_two_rounds() {
    let base = Game::new(make_public_adding_users_base()).unwrap();
    let g = GarblingSpec::identical_features(&base, &[0]).unwrap();
    let r = theoretical_bounds(
        &base,
        &AlignmentCert::Strong(public_adding_users_base_cert()),
        BoundKind::AnonymousElicitation,
        &g,
        &DeviationClass::Deterministic,
    );
    assert!(matches!(r, Err(Error::NotApplicable(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn verify_agrees_with_a_second_sweep(seed in any::<u64>()) {
        let game = random_game(seed, &tiny_spec());
        let rules: Vec<ProviderRule> = (0..2)
            .map(|j| {
                let space = deterministic_rule_space(&game, j).unwrap();
                space[(seed as usize >> j) % space.len()].clone()
            })
            .collect();
        let report = verify_anonymous_ne(&game, &Profile::Anonymous(rules.clone()), &DeviationClass::Deterministic, SweepOptions::default())
            .unwrap();
        for (a, b) in report.max_gain.iter().zip(gain_oracle(&game, &rules)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn enumeration_equals_filtering_by_verify(seed in any::<u64>()) {
        let game = random_game(seed, &tiny_spec());
        let spaces: Vec<Vec<ProviderRule>> = (0..2).map(|j| deterministic_rule_space(&game, j).unwrap()).collect();
        let mut expect = Vec::new();
        for (r0, r1) in spaces[0].iter().cartesian_product(&spaces[1]) {
            let p = Profile::Anonymous(vec![r0.clone(), r1.clone()]);
            if verify_anonymous_ne(&game, &p, &DeviationClass::Deterministic, SweepOptions::default()).unwrap().is_eps_ne {
                expect.push(p);
            }
        }
        let got: Vec<Profile> = enumerate_pure_equilibria(&game, &DeviationClass::Deterministic, GameMode::Anonymous, SweepOptions::default())
            .unwrap()
            .into_iter()
            .map(|e| e.profile)
            .collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn revealed_benchmark_equals_enumeration(seed in any::<u64>()) {
        let a = random_strong_aligned(&mut rng(seed), 3, 3);
        let game = Game::new(a.instance).unwrap();
        for i in 0..game.n_users() {
            let fast = benchmark_shared(&game, i, &a.garbling, 1).unwrap();
            let slow = benchmark_by_enumeration(&game, i, &a.garbling, 1, 1_000_000).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-12);
        }
    }

    #[test]
    fn finer_garbling_never_lowers_the_benchmark(seed in any::<u64>()) {
        let a = random_strong_aligned(&mut rng(seed), 3, 3);
        let game = Game::new(a.instance).unwrap();
        let fine = GarblingSpec::identical_features(&game, &[0]).unwrap();
        let none = GarblingSpec::trivial(&game, &[0, 1]);
        prop_assert!(validate_garbling(&game, &[0, 1], &a.garbling).unwrap().passed);
        for i in 0..game.n_users() {
            let f = benchmark_shared(&game, i, &fine, 1).unwrap();
            let c = benchmark_shared(&game, i, &a.garbling, 1).unwrap();
            let t = benchmark_shared(&game, i, &none, 1).unwrap();
            prop_assert!(f >= c - 1e-12 && c >= t - 1e-12);
        }
    }

    #[test]
    fn relabeling_users_permutes_bounds(seed in any::<u64>()) {
        let a = random_strong_aligned(&mut rng(seed), 3, 3);
        let game = Game::new(a.instance.clone()).unwrap();
        let mut cert = a.cert.clone();
        cert.eps = 0.05;
        let kind = BoundKind::AnonymousDominant;
        let b = theoretical_bounds(&game, &AlignmentCert::Strong(cert.clone()), kind, &a.garbling, &DeviationClass::Deterministic).unwrap();
        let mut inst = a.instance;
        inst.user_utils.swap(0, 1);
        inst.action_sets.swap(0, 1);
        inst.user_features.swap(0, 1);
        let dims = inst.prior_dims();
        let mut prior = vec![0.0; inst.prior.len()];
        for y in 0..dims[0] {
            for u0 in 0..dims[1] {
                for u1 in 0..dims[2] {
                    for p in 0..dims[3] * dims[4] {
                        let from = ((y * dims[1] + u0) * dims[2] + u1) * dims[3] * dims[4] + p;
                        let to = ((y * dims[2] + u1) * dims[1] + u0) * dims[3] * dims[4] + p;
                        prior[to] = inst.prior[from];
                    }
                }
            }
        }
        inst.prior = prior;
        let n0 = game.action_sets[0].len();
        let n1 = game.action_sets[1].len();
        let ny = game.n_states();
        for pu in &mut inst.provider_utils {
            let t = pu.dense.clone().unwrap_or_else(|| pu.separable.as_ref().unwrap().expand(&[n0, n1], ny));
            let mut s = vec![0.0; t.len()];
            for a0 in 0..n0 {
                for a1 in 0..n1 {
                    for y in 0..ny {
                        s[(a1 * n0 + a0) * ny + y] = t[(a0 * n1 + a1) * ny + y];
                    }
                }
            }
            *pu = ProviderUtility::dense(s);
        }
        let swapped = Game::new(inst).unwrap();
        cert.weights.iter_mut().for_each(|w| w.swap(0, 1));
        let b2 = theoretical_bounds(&swapped, &AlignmentCert::Strong(cert), kind, &a.garbling, &DeviationClass::Deterministic).unwrap();
        prop_assert!((b[0].bound - b2[1].bound).abs() <= 1e-12);
        prop_assert!((b[1].bound - b2[0].bound).abs() <= 1e-12);
    }
}
