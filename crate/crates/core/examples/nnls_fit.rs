//! Nonnegative least squares with a free intercept.

use nalgebra::{DMatrix, DVector};
use plural_market::nnls::{nnls_solve, LeastSquaresProblem};

fn main() -> plural_market::Result<()> {
    // b = 0.6 x0 + 0.3 x2 + 0.05, and x1 is anticorrelated noise the fit should ignore
    let a = DMatrix::from_row_slice(
        6,
        3,
        &[
            0.1, 0.9, 0.3, //
            0.4, 0.5, 0.2, //
            0.8, 0.1, 0.6, //
            0.3, 0.7, 0.9, //
            0.6, 0.3, 0.1, //
            0.9, 0.2, 0.5, //
        ],
    );
    let b = DVector::from_fn(6, |r, _| 0.6 * a[(r, 0)] + 0.3 * a[(r, 2)] + 0.05);
    let p = LeastSquaresProblem::new(a, b, true);
    let s = nnls_solve(&p)?;
    println!("weights {:.6?}", s.weights);
    println!("intercept {:.6}", s.intercept);
    println!("rmse {:.2e} after {} iterations", s.rmse, s.iterations);
    println!(
        "KKT violation {:.2e}",
        p.kkt_violation(&s.weights, s.intercept)
    );
    Ok(())
}
