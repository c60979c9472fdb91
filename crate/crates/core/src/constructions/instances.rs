use crate::alignment::{StrongAlignmentCert, WeakAlignmentCert};
use crate::error::{Error, Result};
use crate::game::{GameInstance, ProviderUtility, TieBreak, INSTANCE_SCHEMA_VERSION};

use super::augment::{augment, AugmentedGameSpec};

fn indicator(n_actions: usize, n_states: usize, f: impl Fn(usize, usize) -> bool) -> Vec<Vec<f64>> {
    (0..n_actions)
        .map(|a| {
            (0..n_states)
                .map(|y| if f(a, y) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

/// Two providers who both see `y`, two featureless users, one round.
///
/// Each provider gains `D/(D+1)` from keeping the *other* user on `⊥` and
/// only `1/(D+1)` from informing its own user, so no-disclosure is an
/// equilibrium even though revealing `y` would give each user `c`.
pub fn make_public_example(eps: f64, c: f64, m: usize, d: f64) -> Result<GameInstance> {
    if !(eps > 0.0 && eps < c && c <= 1.0) {
        return Err(Error::ParameterViolation(format!(
            "need 0 < eps < c <= 1, got eps={eps}, c={c}"
        )));
    }
    if (m as f64) * eps - c <= 1e-12 {
        return Err(Error::ParameterViolation(format!(
            "need M > c/eps = {}, got M={m}",
            c / eps
        )));
    }
    if d.is_nan() || d <= 1.0 {
        return Err(Error::ParameterViolation(format!("need D > 1, got {d}")));
    }
    let states = labels("", m);
    let bot = m;
    let mut actions = states.clone();
    actions.push("⊥".into());
    let na = m + 1;

    let mut prior = vec![0.0; m * m * m];
    for y in 0..m {
        prior[(y * m + y) * m + y] = 1.0 / m as f64;
    }
    let user_util: Vec<Vec<f64>> = (0..na)
        .map(|a| {
            (0..m)
                .map(|y| match a {
                    a if a == bot => eps,
                    a if a == y => c,
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    let matches = indicator(na, m, |a, y| a == y);
    let abstains = indicator(na, m, |a, _| a == bot);
    let (lo, hi) = (1.0 / (d + 1.0), d / (d + 1.0));
    let instance = GameInstance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        states: states.clone(),
        user_features: vec![vec!["-".into()], vec!["-".into()]],
        provider_features: vec![states.clone(), states.clone()],
        prior,
        action_sets: vec![actions.clone(), actions],
        user_utils: vec![user_util.clone(), user_util],
        provider_utils: vec![
            ProviderUtility::separable(vec![lo, hi], vec![matches.clone(), abstains.clone()], 0.0),
            ProviderUtility::separable(vec![hi, lo], vec![abstains, matches], 0.0),
        ],
        message_space: states,
        rounds: 1,
        tie_break: TieBreak::default(),
    };
    instance.validate()?;
    Ok(instance)
}

/// The certificate that makes [`make_public_example`] exactly weakly aligned.
pub fn public_example_weak_cert(eps: f64, c: f64, m: usize, d: f64) -> Result<WeakAlignmentCert> {
    let g = make_public_example(eps, c, m, d)?;
    let na = m + 1;
    let matches = indicator(na, m, |a, y| a == y);
    let abstains = indicator(na, m, |a, _| a == m);
    let (lo, hi) = (1.0 / (d + 1.0), d / (d + 1.0));
    let cert = WeakAlignmentCert {
        providers: vec![0, 1],
        components: vec![
            vec![matches.clone(), abstains.clone()],
            vec![abstains, matches],
        ],
        provider_weights: vec![vec![lo, hi], vec![hi, lo]],
        provider_intercepts: vec![0.0, 0.0],
        user_weights: vec![vec![c, eps], vec![eps, c]],
        user_intercepts: vec![0.0, 0.0],
        eps_p: 0.0,
        eps_u: 0.0,
    };
    cert.validate(&g)?;
    Ok(cert)
}

/// Finite restriction of the weak-but-not-strong instance: actions `{0, 1}`,
/// states `(1,0)` and `(0,1)`; provider `j` values `a_i y_j / 2` summed over users.
pub fn make_strict_separation() -> GameInstance {
    let states = vec!["(1,0)".to_string(), "(0,1)".to_string()];
    let component = |j: usize| -> Vec<Vec<f64>> {
        (0..2)
            .map(|a| {
                (0..2)
                    .map(|y| if y == j { a as f64 / 2.0 } else { 0.0 })
                    .collect()
            })
            .collect()
    };
    let user: Vec<Vec<f64>> = (0..2).map(|a| vec![a as f64 / 4.0; 2]).collect();
    let actions = vec!["0".to_string(), "1".to_string()];
    GameInstance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        states: states.clone(),
        user_features: vec![vec!["-".into()], vec!["-".into()]],
        provider_features: vec![states.clone(), states.clone()],
        // x^P_1 = x^P_2 = y
        prior: vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
        action_sets: vec![actions.clone(), actions],
        user_utils: vec![user.clone(), user],
        provider_utils: vec![
            ProviderUtility::separable(vec![1.0, 1.0], vec![component(0), component(0)], 0.0),
            ProviderUtility::separable(vec![1.0, 1.0], vec![component(1), component(1)], 0.0),
        ],
        message_space: states,
        rounds: 1,
        tie_break: TieBreak::default(),
    }
}

/// Exact weak certificate of [`make_strict_separation`]: `u^U_i = F_{1,i}/2 + F_{2,i}/2`.
pub fn strict_separation_weak_cert() -> WeakAlignmentCert {
    let g = make_strict_separation();
    let comps: Vec<Vec<Vec<Vec<f64>>>> = g
        .provider_utils
        .iter()
        .map(|u| u.separable.as_ref().expect("separable").components.clone())
        .collect();
    WeakAlignmentCert {
        providers: vec![0, 1],
        components: comps,
        provider_weights: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        provider_intercepts: vec![0.0, 0.0],
        user_weights: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        user_intercepts: vec![0.0, 0.0],
        eps_p: 0.0,
        eps_u: 0.0,
    }
}

fn adding_users_user_util() -> Vec<Vec<f64>> {
    // actions y1, y2, ⊥
    vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0 / 3.0, 2.0 / 3.0]]
}

/// One provider who sees `y`, one featureless user; the provider's utility is
/// half the user's, so the pair is exactly strongly aligned.
pub fn make_public_adding_users_base() -> GameInstance {
    let states = vec!["y1".to_string(), "y2".to_string()];
    let mut actions = states.clone();
    actions.push("⊥".into());
    GameInstance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        states: states.clone(),
        user_features: vec![vec!["-".into()]],
        provider_features: vec![states.clone()],
        prior: vec![0.5, 0.0, 0.0, 0.5],
        action_sets: vec![actions],
        user_utils: vec![adding_users_user_util()],
        provider_utils: vec![ProviderUtility::separable(
            vec![0.5],
            vec![adding_users_user_util()],
            0.0,
        )],
        message_space: states,
        rounds: 1,
        tie_break: TieBreak::default(),
    }
}

/// Strong certificate of [`make_public_adding_users_base`] (`lambda = 1/2`, `eps = 0`).
pub fn public_adding_users_base_cert() -> StrongAlignmentCert {
    StrongAlignmentCert {
        providers: vec![0],
        weights: vec![vec![0.5]],
        intercepts: vec![0.0],
        eps: 0.0,
    }
}

/// The augmentation of [`make_public_adding_users_base`] by a twin user with
/// `beta = 1/2` and `f = 1[a_2 = ⊥]`.
pub fn public_adding_users_spec() -> AugmentedGameSpec {
    AugmentedGameSpec {
        action_set: vec!["y1".into(), "y2".into(), "⊥".into()],
        user_util: adding_users_user_util(),
        feature_labels: vec!["-".into()],
        feature_given_state: vec![vec![1.0], vec![1.0]],
        betas: vec![0.5],
        perturbations: vec![indicator(3, 2, |a, _| a == 2)],
    }
}

/// `u^P = 1/4 1[a_1 = y] + 1/6 1[a_1 = ⊥] + 1/2 1[a_2 = ⊥]` with two identical users.
pub fn make_public_adding_users() -> GameInstance {
    augment(
        &make_public_adding_users_base(),
        &public_adding_users_spec(),
    )
    .expect("fixed augmentation is valid")
}
