//! Fit OLS, ridge, and lasso on the same synthetic regression problem and
//! compare the recovered coefficients.
//!
//! The true model is sparse: only 3 of 8 coefficients are nonzero. Watch
//! ridge shrink everything a little while lasso zeroes out the noise
//! coefficients entirely.
//!
//! ```sh
//! cargo run --release --example estimator_showdown
//! ```

#![allow(clippy::field_reassign_with_default)]

use flocksim::estimators::{fit_lasso, fit_ols, fit_ridge, Dataset, LASSO_MAX_ITER, LASSO_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn main() -> flocksim::Result<()> {
    let dim = 8;
    let truth = [1.5, 0.0, -2.0, 0.0, 0.0, 0.75, 0.0, 0.0];
    let mut rng = ChaCha12Rng::seed_from_u64(42);

    let mut data = Dataset::new(dim);
    for _ in 0..400 {
        let x: Vec<f64> = (0..dim)
            .map(|_| Rng::sample::<f64, _>(&mut rng, StandardNormal))
            .collect();
        let noise: f64 = Rng::sample::<f64, _>(&mut rng, StandardNormal);
        let y: f64 = x.iter().zip(truth).map(|(xi, w)| xi * w).sum::<f64>() + 0.1 * noise;
        data.push(&x, y)?;
    }

    let ols = fit_ols(&data)?;
    let ridge = fit_ridge(&data, 10.0)?;
    let lasso = fit_lasso(&data, 0.05, LASSO_TOL, LASSO_MAX_ITER)?;

    println!(
        "{:>8} {:>9} {:>9} {:>9} {:>9}",
        "coeff", "truth", "ols", "ridge", "lasso"
    );
    for (i, t) in truth.iter().enumerate() {
        println!(
            "{:>8} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            format!("w[{i}]"),
            t,
            ols.weights[i],
            ridge.weights[i],
            lasso.hypothesis.weights[i]
        );
    }
    let nonzero = lasso.hypothesis.weights.iter().filter(|w| w.abs() > 1e-9).count();
    println!(
        "\nlasso kept {nonzero}/{dim} coefficients ({} iterations, converged: {})",
        lasso.iterations, lasso.converged
    );
    Ok(())
}
