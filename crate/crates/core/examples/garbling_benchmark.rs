//! Common information between two providers who see overlapping
//! coordinates, and the best rule both could run on it.

use plural_market::equilibrium::{
    benchmark_by_enumeration, benchmark_shared, validate_garbling, GarblingSpec,
};
use plural_market::game::{Game, GameInstance, ProviderUtility, TieBreak, INSTANCE_SCHEMA_VERSION};

fn main() -> plural_market::Result<()> {
    // y = (c0, c1, c2) uniform on {0,1}^3; provider 0 sees (c0, c1), provider 1 sees (c1, c2)
    let mut prior = vec![0.0; 8 * 4 * 4];
    for y in 0..8 {
        let (c0, c1, c2) = (y >> 2, (y >> 1) & 1, y & 1);
        prior[(y * 4 + (c0 * 2 + c1)) * 4 + (c1 * 2 + c2)] = 1.0 / 8.0;
    }
    let guess_c1: Vec<Vec<f64>> = (0..2)
        .map(|a| (0..8).map(|y| f64::from((y >> 1) & 1 == a)).collect())
        .collect();
    let guess_c0: Vec<Vec<f64>> = (0..2)
        .map(|a| (0..8).map(|y| f64::from(y >> 2 == a)).collect())
        .collect();
    let inst = GameInstance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        states: (0..8).map(|y| format!("{y:03b}")).collect(),
        user_features: vec![vec!["-".into()]; 2],
        provider_features: vec![(0..4).map(|x| format!("{x:02b}")).collect(); 2],
        prior,
        action_sets: vec![vec!["0".into(), "1".into()]; 2],
        user_utils: vec![guess_c1, guess_c0],
        provider_utils: vec![ProviderUtility::dense(vec![0.0; 4 * 8]); 2],
        message_space: vec!["m0".into(), "m1".into()],
        rounds: 1,
        tie_break: TieBreak::default(),
    };
    let game = Game::new(inst)?;
    let g = GarblingSpec::from_coordinate_subsets(
        &game,
        &[0, 1],
        &[2, 2, 2],
        &[vec![0, 1], vec![1, 2]],
    )?;
    let check = validate_garbling(&game, &[0, 1], &g)?;
    println!(
        "common values {}, garbling valid {} (max violation {:.1e})",
        g.n_values(),
        check.passed,
        check.max_violation
    );
    for (i, who) in ["guesses c1", "guesses c0"].iter().enumerate() {
        let fast = benchmark_shared(&game, i, &g, 1)?;
        let slow = benchmark_by_enumeration(&game, i, &g, 1, 1 << 20)?;
        println!("user {i} ({who}): benchmark {fast:.4} (enumerated {slow:.4})");
    }
    Ok(())
}
