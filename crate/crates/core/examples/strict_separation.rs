//! A market that is weakly aligned with zero error but has no strong
//! certificate better than 1/2.

use plural_market::alignment::{check_weak, fit_strong_exact};
use plural_market::constructions::{make_strict_separation, strict_separation_weak_cert};
use plural_market::game::Game;

fn main() -> plural_market::Result<()> {
    let game = Game::new(make_strict_separation())?;
    let weak = check_weak(&game, &strict_separation_weak_cert())?;
    println!(
        "weak certificate residuals: eps_P {}, eps_U {}",
        weak.eps_p, weak.eps_u
    );
    for j in 0..game.n_providers() {
        let strong = fit_strong_exact(&game, j, &[0, 1])?;
        println!(
            "provider {j}: best strong fit eps {:.6} with weights {:.4?} and intercept {:.4}",
            strong.eps, strong.weights[0], strong.intercepts[0]
        );
    }
    Ok(())
}
