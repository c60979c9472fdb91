//! Nonnegative least squares with an optional free intercept.
//!
//! Lawson–Hanson active set. Columns flagged free in the mask are never
//! clamped. The intercept is handled by centering the design and target.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INNER_TOL: f64 = 1e-12;

/// `min ||A w + c 1 - b||_2` with `w_k >= 0` wherever `nonneg[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquaresProblem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub with_intercept: bool,
    pub nonneg: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnlsSolution {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub rmse: f64,
    /// The design (after centering) has dependent columns, so weights may not be unique.
    pub degenerate: bool,
    pub iterations: usize,
}

impl LeastSquaresProblem {
    /// All columns nonnegative.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, with_intercept: bool) -> Self {
        let nonneg = vec![true; a.ncols()];
        Self {
            a,
            b,
            with_intercept,
            nonneg,
        }
    }

    /// Builds the design from rows.
    pub fn from_rows(rows: &[Vec<f64>], b: &[f64], with_intercept: bool) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged design rows".into()));
        }
        let a = DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]);
        Ok(Self::new(a, DVector::from_column_slice(b), with_intercept))
    }

    fn validate(&self) -> Result<()> {
        if self.a.nrows() != self.b.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} design rows, {} targets",
                self.a.nrows(),
                self.b.len()
            )));
        }
        if self.nonneg.len() != self.a.ncols() {
            return Err(Error::DimensionMismatch(
                "mask length differs from column count".into(),
            ));
        }
        if self.a.iter().chain(self.b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design or target".into()));
        }
        if self.b.is_empty() {
            return Err(Error::InsufficientData("no observations".into()));
        }
        Ok(())
    }

    /// `A w + c`.
    pub fn predict(&self, weights: &[f64], intercept: f64) -> DVector<f64> {
        &self.a * DVector::from_column_slice(weights)
            + DVector::from_element(self.a.nrows(), intercept)
    }

    pub fn rmse(&self, weights: &[f64], intercept: f64) -> f64 {
        let r = self.predict(weights, intercept) - &self.b;
        (r.norm_squared() / self.b.len() as f64).sqrt()
    }

    /// Problem scale used for KKT tolerances: `max(1, ||A||_F) * max(1, ||b||)`.
    pub fn scale(&self) -> f64 {
        self.a.norm().max(1.0) * self.b.norm().max(1.0)
    }

    /// Largest KKT violation of a candidate solution, unscaled.
    ///
    /// With gradient `g = A^T r`, `r = A w + c - b`: free or positive
    /// coordinates need `g = 0`, clamped ones need `g >= 0`, and the intercept
    /// needs `sum r = 0`.
    pub fn kkt_violation(&self, weights: &[f64], intercept: f64) -> f64 {
        let r = self.predict(weights, intercept) - &self.b;
        let g = self.a.transpose() * &r;
        let mut worst: f64 = 0.0;
        for (k, (&w, &gk)) in weights.iter().zip(g.iter()).enumerate() {
            if !self.nonneg[k] || w > 0.0 {
                worst = worst.max(gk.abs());
            } else {
                worst = worst.max((-gk).max(0.0));
            }
            if self.nonneg[k] && w < 0.0 {
                worst = worst.max(-w);
            }
        }
        if self.with_intercept {
            worst = worst.max(r.sum().abs());
        }
        worst
    }
}

fn least_squares_on(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> DVector<f64> {
    if cols.is_empty() {
        return DVector::zeros(0);
    }
    let sub = a.select_columns(cols);
    let svd = sub.svd(true, true);
    let tol = INNER_TOL * svd.singular_values.max().max(1.0);
    svd.solve(b, tol).expect("u and v were computed")
}

fn numerical_rank(a: &DMatrix<f64>) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let tol = 1e-10 * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Solves the problem; see [`LeastSquaresProblem`].
pub fn nnls_solve(problem: &LeastSquaresProblem) -> Result<NnlsSolution> {
    problem.validate()?;
    let n = problem.a.ncols();
    let (a, b, col_means, b_mean) = if problem.with_intercept {
        let means = DVector::from_fn(n, |c, _| problem.a.column(c).mean());
        let mut a = problem.a.clone();
        for c in 0..n {
            a.column_mut(c).add_scalar_mut(-means[c]);
        }
        let bm = problem.b.mean();
        (a, problem.b.add_scalar(-bm), means, bm)
    } else {
        (problem.a.clone(), problem.b.clone(), DVector::zeros(n), 0.0)
    };
    let degenerate = numerical_rank(&a) < n;
    let tol = INNER_TOL * problem.scale();

    let mut passive: Vec<bool> = problem.nonneg.iter().map(|&nn| !nn).collect();
    let mut x = DVector::<f64>::zeros(n);
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let cols: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
        let z = least_squares_on(&a, &b, &cols);
        let mut full = DVector::zeros(n);
        for (k, &c) in cols.iter().enumerate() {
            full[c] = z[k];
        }
        full
    };
    if passive.iter().any(|&p| p) {
        x = solve_passive(&passive);
    }
    let max_outer = 3 * n.max(1);
    let mut iterations = 0;
    while iterations < max_outer {
        let grad = a.transpose() * (&b - &a * &x);
        let candidate = (0..n)
            .filter(|&k| !passive[k])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(t) = candidate.filter(|&k| grad[k] > tol) else {
            break;
        };
        iterations += 1;
        passive[t] = true;
        loop {
            let z = solve_passive(&passive);
            let blocking: Vec<usize> = (0..n)
                .filter(|&k| passive[k] && problem.nonneg[k] && z[k] <= INNER_TOL)
                .collect();
            if blocking.is_empty() {
                x = z;
                break;
            }
            let alpha = blocking
                .iter()
                .map(|&k| {
                    let denom = x[k] - z[k];
                    if denom > 0.0 {
                        x[k] / denom
                    } else {
                        0.0
                    }
                })
                .fold(f64::INFINITY, f64::min)
                .clamp(0.0, 1.0);
            x += (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && problem.nonneg[k] && x[k] <= INNER_TOL {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    let weights: Vec<f64> = x
        .iter()
        .zip(&problem.nonneg)
        .map(|(&v, &nn)| if nn { v.max(0.0) } else { v })
        .collect();
    let intercept = if problem.with_intercept {
        b_mean
            - col_means
                .iter()
                .zip(&weights)
                .map(|(mu, w)| mu * w)
                .sum::<f64>()
    } else {
        0.0
    };
    Ok(NnlsSolution {
        rmse: problem.rmse(&weights, intercept),
        weights,
        intercept,
        degenerate,
        iterations,
    })
}
