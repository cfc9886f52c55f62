//! Binary logistic regression fit by Newton's method with step-halving.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{logistic, precise_sum, softplus, LogitHyper};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitParams {
    pub intercept: f64,
    pub coef: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LogitParams {
    pub fn log_odds(&self, row: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(row).map(|(b, x)| b * x).sum::<f64>()
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        logistic(self.log_odds(row))
    }
}

/// Mean negative log-likelihood at `beta` (intercept first).
fn mean_nll(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let z = x * beta;
    precise_sum(z.iter().zip(y).map(|(&z, &y)| softplus(z) - y * z)) / y.len() as f64
}

pub fn fit(train: &Dataset, hp: &LogitHyper) -> Result<LogitParams> {
    let (n, p) = (train.n_rows(), train.n_features());
    let x = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { train.value(i, j - 1) });
    let y: Vec<f64> = train.response().iter().map(|&v| v as f64).collect();
    let share = precise_sum(y.iter().copied()) / n as f64;
    if share == 0.0 || share == 1.0 {
        warn!("logit: response is constant; the intercept will diverge toward the iteration cap");
    }

    let mut beta = DVector::zeros(p + 1);
    let mut loss = mean_nll(&x, &y, &beta);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..hp.max_iter {
        let z = &x * &beta;
        let prob: Vec<f64> = z.iter().map(|&z| logistic(z)).collect();
        let resid = DVector::from_fn(n, |i, _| (prob[i] - y[i]) / n as f64);
        let grad = x.transpose() * &resid;
        if grad.norm() < hp.tol {
            converged = true;
            iterations = it;
            break;
        }
        let mut xw = x.clone();
        for i in 0..n {
            let w = (prob[i] * (1.0 - prob[i]) / n as f64).sqrt();
            xw.row_mut(i).scale_mut(w);
        }
        let mut hess = xw.transpose() * xw;
        let step = match hess.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => {
                let jitter = 1e-10 * (hess.trace() / (p + 1) as f64).max(1e-12);
                for d in 0..=p {
                    hess[(d, d)] += jitter;
                }
                match hess.cholesky() {
                    Some(c) => c.solve(&grad),
                    None => grad.clone(),
                }
            }
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let cand = &beta - &step * t;
            let cand_loss = mean_nll(&x, &y, &cand);
            if cand_loss.is_finite() && cand_loss <= loss {
                beta = cand;
                loss = cand_loss;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations = it + 1;
        if !accepted {
            break;
        }
    }
    if !loss.is_finite() {
        return Err(Error::Training("logit log-likelihood is not finite".into()));
    }
    if !converged {
        warn!("logit: gradient norm above {} after {iterations} iterations (possible separation)", hp.tol);
    }
    Ok(LogitParams {
        intercept: beta[0],
        coef: beta.iter().skip(1).copied().collect(),
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSpec;

    fn data(rows: Vec<Vec<f64>>, y: Vec<u8>) -> Dataset {
        let p = rows[0].len();
        let specs = (0..p).map(|t| FeatureSpec::continuous(&format!("x{t}"), "")).collect();
        Dataset::new(specs, rows, y, vec![]).unwrap()
    }

    fn hp() -> LogitHyper {
        LogitHyper { max_iter: 100, tol: 1e-8 }
    }

    #[test]
    fn separable_one_feature() {
        let xs = [-3.0, -2.0, -1.5, -1.0, 1.0, 1.5, 2.0, 3.0];
        let d = data(xs.iter().map(|&x| vec![x]).collect(), xs.iter().map(|&x| u8::from(x > 0.0)).collect());
        let m = fit(&d, &hp()).unwrap();
        assert!(m.proba(&[2.0]) > 0.9);
        assert!(m.proba(&[-2.0]) < 0.1);
    }

    #[test]
    fn all_positive_is_intercept_driven() {
        let d = data(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1, 1, 1]);
        let m = fit(&d, &hp()).unwrap();
        for x in [-5.0, 0.0, 1.0, 5.0] {
            assert!(m.proba(&[x]) >= 0.99);
        }
    }

    /// Plain Newton iteration with a hand-rolled 3x3 solve.
    fn newton_oracle(rows: &[[f64; 2]], y: &[f64]) -> [f64; 3] {
        let mut b = [0.0; 3];
        for _ in 0..50 {
            let mut g = [0.0; 3];
            let mut h = [[0.0; 3]; 3];
            for (r, &yi) in rows.iter().zip(y) {
                let xv = [1.0, r[0], r[1]];
                let z: f64 = (0..3).map(|j| b[j] * xv[j]).sum();
                let pr = 1.0 / (1.0 + (-z).exp());
                for j in 0..3 {
                    g[j] += (pr - yi) * xv[j];
                    for k in 0..3 {
                        h[j][k] += pr * (1.0 - pr) * xv[j] * xv[k];
                    }
                }
            }
            // Gauss-Jordan on [h | g]
            let mut a = [[0.0; 4]; 3];
            for j in 0..3 {
                a[j][..3].copy_from_slice(&h[j]);
                a[j][3] = g[j];
            }
            for c in 0..3 {
                let piv = (c..3).max_by(|&i, &k| a[i][c].abs().total_cmp(&a[k][c].abs())).unwrap();
                a.swap(c, piv);
                for r in 0..3 {
                    if r != c {
                        let f = a[r][c] / a[c][c];
                        for k in c..4 {
                            a[r][k] -= f * a[c][k];
                        }
                    }
                }
            }
            for j in 0..3 {
                b[j] -= a[j][3] / a[j][j];
            }
        }
        b
    }

    #[test]
    fn matches_newton_oracle_on_six_rows() {
        let rows = [[0.5, 1.0], [1.5, 0.0], [2.0, 1.0], [3.0, 0.0], [0.2, 0.0], [2.5, 1.0]];
        let y = [0u8, 1, 1, 0, 0, 1];
        let d = data(rows.iter().map(|r| r.to_vec()).collect(), y.to_vec());
        let m = fit(&d, &hp()).unwrap();
        assert!(m.converged);
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let b = newton_oracle(&rows, &yf);
        assert!((m.intercept - b[0]).abs() < 1e-6);
        assert!((m.coef[0] - b[1]).abs() < 1e-6);
        assert!((m.coef[1] - b[2]).abs() < 1e-6);
    }
}
