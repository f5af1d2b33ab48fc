//! Linear reward models and their fitting procedures: incremental SGD,
//! batch OLS/ridge via the normal equations, LASSO by coordinate
//! descent, and hypothesis averaging/blending.
//!
//! OLS deliberately goes through an unregularized symmetric
//! factorization: ill-conditioning surfaces as [`Error::Divergence`]
//! rather than being silently regularized away.

use serde::{Deserialize, Serialize};

use crate::domain::FeatureVector;
use crate::error::{Error, Result};

pub const LASSO_TOL: f64 = 1e-6;
pub const LASSO_MAX_ITER: usize = 1000;

/// Relative pivot floor below which a Cholesky factorization is treated
/// as divergent.
const PIVOT_TOL: f64 = 1e-10;

/// Weight vector of a linear reward model f(x) = w . x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub weights: Vec<f64>,
}

impl Hypothesis {
    pub fn zeros(dim: usize) -> Self {
        Hypothesis { weights: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Predicted reward: the dot product w . x.
pub fn predict(h: &Hypothesis, x: &FeatureVector) -> Result<f64> {
    if h.dim() != x.dim() {
        return Err(Error::Dimension { expected: h.dim(), got: x.dim() });
    }
    Ok(dot(&h.weights, x.as_slice()))
}

/// One gradient step on the half-squared error 0.5 * (y - w.x)^2:
/// w' = w + eta * (y - w.x) * x.
pub fn sgd_step(h: &Hypothesis, x: &FeatureVector, y: f64, eta: f64) -> Result<Hypothesis> {
    if h.dim() != x.dim() {
        return Err(Error::Dimension { expected: h.dim(), got: x.dim() });
    }
    if eta <= 0.0 || !eta.is_finite() {
        return Err(Error::Validation("eta must be positive and finite".into()));
    }
    if !y.is_finite() || !x.is_finite() {
        return Err(Error::NonFinite("sgd_step input".into()));
    }
    let residual = y - dot(&h.weights, x.as_slice());
    let weights = h
        .weights
        .iter()
        .zip(x.as_slice())
        .map(|(w, xi)| w + eta * residual * xi)
        .collect();
    Ok(Hypothesis { weights })
}

/// Chronologically ordered (x, y) rows of uniform dimension.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    dim: usize,
    xs: Vec<f64>, // row-major, len = n * dim
    ys: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Dataset { dim, xs: Vec::new(), ys: Vec::new() }
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset row".into()));
        }
        self.xs.extend_from_slice(x);
        self.ys.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.xs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.ys[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.ys
    }

    /// Copy of the rows in `range`, order preserved.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        let mut out = Dataset::new(self.dim);
        for i in range {
            out.xs.extend_from_slice(self.row(i));
            out.ys.push(self.ys[i]);
        }
        out
    }

    /// Same rows with targets replaced (e.g. by a normalized series).
    pub fn with_targets(&self, ys: Vec<f64>) -> Result<Dataset> {
        if ys.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), got: ys.len() });
        }
        Ok(Dataset { dim: self.dim, xs: self.xs.clone(), ys })
    }

    pub fn append(&mut self, other: &Dataset) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: other.dim });
        }
        self.xs.extend_from_slice(&other.xs);
        self.ys.extend_from_slice(&other.ys);
        Ok(())
    }
}

/// Accumulated normal equations X'X w = X'y, updatable one row at a
/// time. `fit_ols`/`fit_ridge` build one of these from a dataset, so an
/// incrementally maintained system solves to bit-identical weights.
#[derive(Clone, Debug)]
pub struct NormalEquations {
    dim: usize,
    n: usize,
    xtx: Vec<f64>, // upper triangle filled, row-major d*d
    xty: Vec<f64>,
}

impl NormalEquations {
    pub fn new(dim: usize) -> Self {
        NormalEquations { dim, n: 0, xtx: vec![0.0; dim * dim], xty: vec![0.0; dim] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add_row(&mut self, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        let d = self.dim;
        #[allow(clippy::needless_range_loop)] // triangular index math
        for i in 0..d {
            let xi = x[i];
            self.xty[i] += xi * y;
            for j in i..d {
                self.xtx[i * d + j] += xi * x[j];
            }
        }
        self.n += 1;
        Ok(())
    }

    pub fn solve_ols(&self) -> Result<Hypothesis> {
        self.solve_with_ridge(0.0)
    }

    pub fn solve_ridge(&self, lambda: f64) -> Result<Hypothesis> {
        if lambda < 0.0 || lambda.is_nan() {
            return Err(Error::Validation("ridge lambda must be >= 0".into()));
        }
        self.solve_with_ridge(lambda)
    }

    fn solve_with_ridge(&self, lambda: f64) -> Result<Hypothesis> {
        if self.n == 0 {
            return Err(Error::EmptyInput("cannot fit on an empty dataset".into()));
        }
        let d = self.dim;
        let mut a = self.xtx.clone();
        // mirror the upper triangle and add the ridge diagonal
        for i in 0..d {
            a[i * d + i] += lambda;
            for j in (i + 1)..d {
                a[j * d + i] = a[i * d + j];
            }
        }
        let weights = cholesky_solve(&mut a, d, &self.xty)?;
        Ok(Hypothesis { weights })
    }
}

/// Solves A w = b for symmetric positive-definite A (row-major, d*d),
/// in place. A pivot at or below the relative floor is reported as
/// divergence.
fn cholesky_solve(a: &mut [f64], d: usize, b: &[f64]) -> Result<Vec<f64>> {
    let scale = (0..d).map(|i| a[i * d + i].abs()).fold(0.0f64, f64::max).max(1.0);
    for j in 0..d {
        let mut pivot = a[j * d + j];
        for k in 0..j {
            pivot -= a[j * d + k] * a[j * d + k];
        }
        if pivot.is_nan() || pivot <= PIVOT_TOL * scale {
            return Err(Error::Divergence(format!(
                "Gram matrix not positive definite at column {j} (pivot {pivot:.3e})"
            )));
        }
        let ljj = pivot.sqrt();
        a[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = s / ljj;
        }
    }
    // forward: L z = b
    let mut z = vec![0.0; d];
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * d + k] * z[k];
        }
        z[i] = s / a[i * d + i];
    }
    // backward: L' w = z
    let mut w = vec![0.0; d];
    for i in (0..d).rev() {
        let mut s = z[i];
        for k in (i + 1)..d {
            s -= a[k * d + i] * w[k];
        }
        w[i] = s / a[i * d + i];
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence("non-finite solution".into()));
    }
    Ok(w)
}

/// Ordinary least squares through the normal equations.
pub fn fit_ols(data: &Dataset) -> Result<Hypothesis> {
    normal_equations_of(data)?.solve_ols()
}

/// Ridge regression: (X'X + lambda I) w = X'y. The bias coefficient is
/// regularized like every other coefficient.
pub fn fit_ridge(data: &Dataset, lambda: f64) -> Result<Hypothesis> {
    normal_equations_of(data)?.solve_ridge(lambda)
}

fn normal_equations_of(data: &Dataset) -> Result<NormalEquations> {
    if data.is_empty() {
        return Err(Error::EmptyInput("cannot fit on an empty dataset".into()));
    }
    let mut ne = NormalEquations::new(data.dim());
    for i in 0..data.len() {
        ne.add_row(data.row(i), data.target(i))?;
    }
    Ok(ne)
}

/// sign(z) * max(|z| - gamma, 0).
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

#[derive(Clone, Debug)]
pub struct LassoFit {
    pub hypothesis: Hypothesis,
    pub converged: bool,
    pub iterations: usize,
}

/// LASSO by cyclic coordinate descent on
/// (1/2n) ||y - Xw||^2 + lambda ||w||_1, stopping when the largest
/// coefficient change in a sweep falls below `tol`.
pub fn fit_lasso(data: &Dataset, lambda: f64, tol: f64, max_iter: usize) -> Result<LassoFit> {
    if data.is_empty() {
        return Err(Error::EmptyInput("cannot fit on an empty dataset".into()));
    }
    if lambda < 0.0 || lambda.is_nan() {
        return Err(Error::Validation("lasso lambda must be >= 0".into()));
    }
    let n = data.len();
    let d = data.dim();
    let nf = n as f64;

    // column sums of squares
    let mut col_sq = vec![0.0f64; d];
    for i in 0..n {
        for (j, &v) in data.row(i).iter().enumerate() {
            col_sq[j] += v * v;
        }
    }

    let mut w = vec![0.0f64; d];
    let mut residual: Vec<f64> = data.targets().to_vec();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        let mut max_delta = 0.0f64;
        #[allow(clippy::needless_range_loop)] // coordinate descent index math
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let mut rho = col_sq[j] * w[j];
            for i in 0..n {
                rho += data.row(i)[j] * residual[i];
            }
            let w_new = soft_threshold(rho / nf, lambda) * nf / col_sq[j];
            let delta = w_new - w[j];
            if delta != 0.0 {
                for i in 0..n {
                    residual[i] -= delta * data.row(i)[j];
                }
                w[j] = w_new;
            }
            max_delta = max_delta.max(delta.abs());
        }
        if max_delta < tol {
            converged = true;
            break;
        }
    }

    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("lasso coefficients".into()));
    }
    Ok(LassoFit { hypothesis: Hypothesis { weights: w }, converged, iterations })
}

/// Elementwise mean of a non-empty list of hypotheses.
pub fn average_hypotheses(hs: &[Hypothesis]) -> Result<Hypothesis> {
    let first = hs
        .first()
        .ok_or_else(|| Error::EmptyInput("cannot average zero hypotheses".into()))?;
    let d = first.dim();
    let mut weights = vec![0.0f64; d];
    for h in hs {
        if h.dim() != d {
            return Err(Error::Dimension { expected: d, got: h.dim() });
        }
        for (acc, w) in weights.iter_mut().zip(&h.weights) {
            *acc += w;
        }
    }
    let inv = 1.0 / hs.len() as f64;
    weights.iter_mut().for_each(|w| *w *= inv);
    Ok(Hypothesis { weights })
}

/// (1 - alpha_adv) * w_agent + alpha_adv * w_adviser.
pub fn blend(w_agent: &Hypothesis, w_adviser: &Hypothesis, alpha_adv: f64) -> Result<Hypothesis> {
    if w_agent.dim() != w_adviser.dim() {
        return Err(Error::Dimension { expected: w_agent.dim(), got: w_adviser.dim() });
    }
    if !(0.0..=1.0).contains(&alpha_adv) {
        return Err(Error::Validation("blend weight out of range [0, 1]".into()));
    }
    let weights = w_agent
        .weights
        .iter()
        .zip(&w_adviser.weights)
        .map(|(a, b)| (1.0 - alpha_adv) * a + alpha_adv * b)
        .collect();
    Ok(Hypothesis { weights })
}

/// Batch fitter selector used by policies and the analysis layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fitter {
    Ols,
    Ridge(f64),
    Lasso(f64),
}

impl Fitter {
    pub fn fit(&self, data: &Dataset) -> Result<Hypothesis> {
        match *self {
            Fitter::Ols => fit_ols(data),
            Fitter::Ridge(lambda) => fit_ridge(data, lambda),
            Fitter::Lasso(lambda) => {
                fit_lasso(data, lambda, LASSO_TOL, LASSO_MAX_ITER).map(|f| f.hypothesis)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
