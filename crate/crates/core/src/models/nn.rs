//! Single-hidden-layer sigmoid network trained by full-batch gradient descent.
//!
//! Objective: (sum of cross-entropy + decay * sum of squared weights) / N,
//! with every weight (biases included) decayed. Inputs are z-scored with the
//! training means and SDs, which are stored with the weights.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{logistic, softplus, NnHyper};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnParams {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub hidden: usize,
    /// Input-to-hidden weights, `hidden` blocks of `[bias, w_1..w_p]`, then
    /// hidden-to-output weights `[bias, v_1..v_hidden]`.
    pub weights: Vec<f64>,
    pub iterations: usize,
}

/// Number of weights for `p` inputs and `hidden` units.
pub fn n_weights(p: usize, hidden: usize) -> usize {
    hidden * (p + 1) + hidden + 1
}

fn forward(theta: &[f64], x: &[f64], hidden: usize, act: &mut [f64]) -> f64 {
    let p = x.len();
    let out = &theta[hidden * (p + 1)..];
    let mut z = out[0];
    for j in 0..hidden {
        let w = &theta[j * (p + 1)..(j + 1) * (p + 1)];
        let a = w[0] + w[1..].iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
        act[j] = logistic(a);
        z += out[j + 1] * act[j];
    }
    z
}

impl NnParams {
    pub fn proba(&self, row: &[f64]) -> f64 {
        let x: Vec<f64> = row
            .iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect();
        let mut act = vec![0.0; self.hidden];
        logistic(forward(&self.weights, &x, self.hidden, &mut act))
    }
}

/// Penalized loss and its gradient at `theta` for standardized row-major
/// inputs `x` (n rows of p values).
pub fn loss_and_gradient(theta: &[f64], x: &[f64], y: &[f64], p: usize, hidden: usize, decay: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let mut grad = vec![0.0; theta.len()];
    let mut act = vec![0.0; hidden];
    let mut loss = 0.0;
    let out_off = hidden * (p + 1);
    for i in 0..n {
        let xi = &x[i * p..(i + 1) * p];
        let z = forward(theta, xi, hidden, &mut act);
        loss += softplus(z) - y[i] * z;
        let dz = logistic(z) - y[i];
        grad[out_off] += dz;
        for j in 0..hidden {
            grad[out_off + j + 1] += dz * act[j];
            let dh = dz * theta[out_off + j + 1] * act[j] * (1.0 - act[j]);
            let g = &mut grad[j * (p + 1)..(j + 1) * (p + 1)];
            g[0] += dh;
            for (gk, &xk) in g[1..].iter_mut().zip(xi) {
                *gk += dh * xk;
            }
        }
    }
    let penalty: f64 = theta.iter().map(|w| w * w).sum();
    let nf = n as f64;
    for (g, &w) in grad.iter_mut().zip(theta) {
        *g = (*g + 2.0 * decay * w) / nf;
    }
    ((loss + decay * penalty) / nf, grad)
}

/// Fit; also returns the objective after every accepted step (starting
/// with the initial weights).
pub fn fit(train: &Dataset, hp: &NnHyper, seed: u64) -> Result<(NnParams, Vec<f64>)> {
    let (n, p) = (train.n_rows(), train.n_features());
    let mut means = vec![0.0; p];
    let mut sds = vec![1.0; p];
    for t in 0..p {
        let col = train.column(t);
        let m = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        means[t] = m;
        sds[t] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let x: Vec<f64> = train
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| (v - means[k % p]) / sds[k % p])
        .collect();
    let y: Vec<f64> = train.response().iter().map(|&v| v as f64).collect();

    let mut rng = seeded(seed);
    let mut theta: Vec<f64> = (0..n_weights(p, hp.hidden_units))
        .map(|_| rng.random_range(-0.5..0.5))
        .collect();
    let h = hp.hidden_units;
    let (mut loss, mut grad) = loss_and_gradient(&theta, &x, &y, p, h, hp.weight_decay);
    if !loss.is_finite() {
        return Err(Error::Training(format!("nn initial loss is {loss}")));
    }
    let mut history = vec![loss];
    let mut eta = hp.step_size;
    let mut iterations = 0;
    while iterations < hp.max_iter {
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < hp.tol {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while eta > 1e-20 {
            let cand: Vec<f64> = theta.iter().zip(&grad).map(|(w, g)| w - eta * g).collect();
            let (cl, cg) = loss_and_gradient(&cand, &x, &y, p, h, hp.weight_decay);
            if cl.is_nan() {
                return Err(Error::Training(format!(
                    "nn loss became NaN at iteration {iterations} (step {eta}, gradient norm {gnorm})"
                )));
            }
            if cl <= loss {
                theta = cand;
                loss = cl;
                grad = cg;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
        history.push(loss);
        eta = (2.0 * eta).min(hp.step_size);
    }
    Ok((
        NnParams {
            means,
            sds,
            hidden: h,
            weights: theta,
            iterations,
        },
        history,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSpec;
    use rand::RngCore;

    fn hp() -> NnHyper {
        NnHyper {
            hidden_units: 3,
            weight_decay: 0.1,
            step_size: 2.0,
            max_iter: 200,
            tol: 1e-6,
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = seeded(3);
        for _ in 0..5 {
            let (p, h) = (3, 4);
            let x: Vec<f64> = (0..5 * p).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..5).map(|_| (rng.next_u32() % 2) as f64).collect();
            let theta: Vec<f64> = (0..n_weights(p, h)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, g) = loss_and_gradient(&theta, &x, &y, p, h, 0.1);
            for k in 0..theta.len() {
                let eps = 1e-5;
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[k] += eps;
                tm[k] -= eps;
                let fd = (loss_and_gradient(&tp, &x, &y, p, h, 0.1).0 - loss_and_gradient(&tm, &x, &y, p, h, 0.1).0)
                    / (2.0 * eps);
                let rel = (fd - g[k]).abs() / g[k].abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-5, "weight {k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn loss_history_non_increasing_and_fits() {
        let mut rng = seeded(1);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..1.0)]).collect();
        let y = rows.iter().map(|r| u8::from(r[0] > 5.0)).collect();
        let specs = vec![FeatureSpec::continuous("a", ""), FeatureSpec::continuous("b", "")];
        let d = Dataset::new(specs, rows, y, vec![]).unwrap();
        let (m, hist) = fit(&d, &hp(), 4).unwrap();
        for w in hist.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(m.proba(&[9.0, 0.5]) > 0.7);
        assert!(m.proba(&[1.0, 0.5]) < 0.3);
    }
}
