//! L2-regularized logistic regression trained by Newton iterations.
//!
//! Deterministic: zero initialization, exact Hessian solves via Cholesky,
//! step halving when a step would increase the penalized loss, convergence on
//! the gradient's max norm. The intercept is not penalized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Replace a missing value with the training mean of the feature and add
    /// a companion 0/1 missing-indicator column.
    MeanImputeWithIndicator,
    /// Drop pairs that have any missing value among the model's features.
    DropIncomplete,
}

/// One model column: a feature value or a missing indicator for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelColumn {
    pub name: String,
    /// Index into the pairwise feature roster.
    pub feature_index: usize,
    pub indicator: bool,
    /// Training mean used to impute missing values (0 for indicators).
    pub imputation_mean: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub columns: Vec<ModelColumn>,
    pub missing_policy: MissingPolicy,
    pub l2: f64,
    pub iterations: usize,
    pub final_loss: f64,
}

impl LogisticModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<LogisticModel> {
        Ok(serde_json::from_str(s)?)
    }

    /// Score a feature lookup (by roster index). Returns `None` when the
    /// policy is [`MissingPolicy::DropIncomplete`] and a value is missing.
    pub fn score_with(&self, get: impl Fn(usize) -> Option<f64>) -> Option<f64> {
        let mut eta = self.intercept;
        for col in &self.columns {
            let raw = get(col.feature_index);
            let value = if col.indicator {
                f64::from(raw.is_none())
            } else {
                match raw {
                    Some(v) => v,
                    None => match self.missing_policy {
                        MissingPolicy::MeanImputeWithIndicator => col.imputation_mean,
                        MissingPolicy::DropIncomplete => return None,
                    },
                }
            };
            eta += col.weight * value;
        }
        Some(sigmoid(eta))
    }
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta.clamp(-35.0, 35.0)).exp())
}

fn log1p_exp(eta: f64) -> f64 {
    // ln(1 + e^eta), stable at both ends.
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

/// Solve `A x = b` for symmetric positive-definite `A` (row-major, modified
/// in place) by Cholesky factorization.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        for k in 0..j {
            let ljk = a[j * n + k];
            for i in j..n {
                a[i * n + j] -= a[i * n + k] * ljk;
            }
        }
        let diag = a[j * n + j];
        if diag <= 0.0 {
            return Err(Error::InvalidConfig(
                "Hessian is not positive definite".into(),
            ));
        }
        let root = diag.sqrt();
        for i in j..n {
            a[i * n + j] /= root;
        }
    }
    // Forward then backward substitution on the lower factor.
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i * n + k] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k * n + i] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    Ok(())
}

pub(crate) struct TrainData {
    /// Row-major design matrix, `rows × cols`, intercept not included.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

fn penalized_nll(data: &TrainData, beta: &[f64], l2: f64) -> f64 {
    let mut loss = 0.0;
    for r in 0..data.rows {
        let mut eta = beta[0];
        let row = &data.x[r * data.cols..(r + 1) * data.cols];
        for (c, v) in row.iter().enumerate() {
            eta += beta[c + 1] * v;
        }
        loss += log1p_exp(eta) - data.y[r] * eta;
    }
    let penalty: f64 = beta[1..].iter().map(|w| w * w).sum();
    loss + 0.5 * l2 * penalty
}

/// Fit by Newton's method. Returns `(intercept, weights, iterations, loss)`.
pub(crate) fn fit(
    data: &TrainData,
    l2: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>, usize, f64)> {
    let p = data.cols + 1; // intercept first
    let mut beta = vec![0.0f64; p];
    let mut loss = penalized_nll(data, &beta, l2);

    for iter in 1..=max_iter {
        // Gradient and Hessian of the penalized negative log-likelihood.
        let mut grad = vec![0.0f64; p];
        let mut hess = vec![0.0f64; p * p];
        for r in 0..data.rows {
            let row = &data.x[r * data.cols..(r + 1) * data.cols];
            let mut eta = beta[0];
            for (c, v) in row.iter().enumerate() {
                eta += beta[c + 1] * v;
            }
            let mu = sigmoid(eta);
            let resid = data.y[r] - mu;
            let w = (mu * (1.0 - mu)).max(1e-12);
            grad[0] += resid;
            hess[0] += w;
            for (c, v) in row.iter().enumerate() {
                grad[c + 1] += resid * v;
                hess[c + 1] += w * v;
                hess[(c + 1) * p] += w * v;
                for (c2, v2) in row.iter().enumerate().skip(c) {
                    hess[(c + 1) * p + c2 + 1] += w * v * v2;
                }
            }
        }
        for c in 1..p {
            grad[c] -= l2 * beta[c];
            hess[c * p + c] += l2;
            for c2 in c + 1..p {
                hess[c2 * p + c] = hess[c * p + c2];
            }
        }

        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm <= tol {
            return Ok((beta[0], beta[1..].to_vec(), iter - 1, loss));
        }

        let mut step = grad.clone();
        cholesky_solve(&mut hess, &mut step, p)?;

        // Step halving keeps near-separable problems from overshooting.
        let mut scale = 1.0f64;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = beta
                .iter()
                .zip(&step)
                .map(|(b, s)| b + scale * s)
                .collect();
            let trial_loss = penalized_nll(data, &trial, l2);
            if trial_loss <= loss + 1e-12 {
                beta = trial;
                loss = trial_loss;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // Cannot improve further: treat as converged at this point.
            return Ok((beta[0], beta[1..].to_vec(), iter, loss));
        }
    }

    // Check the gradient once more before giving up.
    let mut gnorm = 0.0f64;
    for r in 0..data.rows {
        let row = &data.x[r * data.cols..(r + 1) * data.cols];
        let mut eta = beta[0];
        for (c, v) in row.iter().enumerate() {
            eta += beta[c + 1] * v;
        }
        let resid = data.y[r] - sigmoid(eta);
        gnorm = gnorm.max(resid.abs() * row.iter().fold(1.0f64, |m, v| m.max(v.abs())));
    }
    if gnorm <= tol {
        return Ok((beta[0], beta[1..].to_vec(), max_iter, loss));
    }
    Err(Error::OptimizerDiverged {
        iterations: max_iter,
        gradient_norm: gnorm,
    })
}
