//! Naive Bayes with per-kind class-conditional likelihoods.
//!
//! Continuous features are Gaussian (variance floored), binary features
//! Bernoulli, and discrete-ordinal features categorical over the values seen
//! in training. No smoothing is applied: a value impossible under one class
//! forces the posterior, and a value unseen under both classes is skipped.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::NbHyper;
use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "likelihood", rename_all = "lowercase")]
pub enum NbFeature {
    Gaussian { mean: [f64; 2], var: [f64; 2] },
    Bernoulli { p_one: [f64; 2] },
    Categorical { values: Vec<f64>, probs: [Vec<f64>; 2] },
}

impl NbFeature {
    fn log_lik(&self, x: f64, class: usize) -> f64 {
        match self {
            NbFeature::Gaussian { mean, var } => {
                let d = x - mean[class];
                -0.5 * ((2.0 * PI * var[class]).ln() + d * d / var[class])
            }
            NbFeature::Bernoulli { p_one } => {
                let p = if x != 0.0 { p_one[class] } else { 1.0 - p_one[class] };
                p.ln()
            }
            NbFeature::Categorical { values, probs } => match values.binary_search_by(|v| v.total_cmp(&x)) {
                Ok(k) => probs[class][k].ln(),
                Err(_) => f64::NEG_INFINITY,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub prior: [f64; 2],
    pub features: Vec<NbFeature>,
}

impl NbParams {
    pub fn proba(&self, row: &[f64]) -> f64 {
        let mut l = [self.prior[0].ln(), self.prior[1].ln()];
        for (f, &x) in self.features.iter().zip(row) {
            let (a, b) = (f.log_lik(x, 0), f.log_lik(x, 1));
            if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
                continue;
            }
            l[0] += a;
            l[1] += b;
        }
        match (l[0] == f64::NEG_INFINITY, l[1] == f64::NEG_INFINITY) {
            (true, false) => 1.0,
            (false, true) => 0.0,
            (true, true) => self.prior[1],
            (false, false) => 1.0 / (1.0 + (l[0] - l[1]).exp()),
        }
    }
}

pub fn fit(train: &Dataset, hp: &NbHyper) -> Result<NbParams> {
    let y = train.response();
    let n1 = y.iter().filter(|&&v| v == 1).count();
    let n0 = y.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::Training("naive Bayes needs both classes present".into()));
    }
    let counts = [n0 as f64, n1 as f64];
    let n = y.len() as f64;
    let mut features = Vec::with_capacity(train.n_features());
    for t in 0..train.n_features() {
        let col = train.column(t);
        let f = match train.spec(t).kind {
            FeatureKind::Continuous => {
                let mut sum = [0.0; 2];
                for (&x, &c) in col.iter().zip(y) {
                    sum[c as usize] += x;
                }
                let mean = [sum[0] / counts[0], sum[1] / counts[1]];
                let mut ss = [0.0; 2];
                for (&x, &c) in col.iter().zip(y) {
                    let d = x - mean[c as usize];
                    ss[c as usize] += d * d;
                }
                let var = [
                    (ss[0] / counts[0]).max(hp.variance_floor),
                    (ss[1] / counts[1]).max(hp.variance_floor),
                ];
                NbFeature::Gaussian { mean, var }
            }
            FeatureKind::Binary => {
                let mut ones = [0.0; 2];
                for (&x, &c) in col.iter().zip(y) {
                    if x != 0.0 {
                        ones[c as usize] += 1.0;
                    }
                }
                NbFeature::Bernoulli {
                    p_one: [ones[0] / counts[0], ones[1] / counts[1]],
                }
            }
            FeatureKind::DiscreteOrdinal => {
                let mut values = col.clone();
                values.sort_by(f64::total_cmp);
                values.dedup();
                let mut probs = [vec![0.0; values.len()], vec![0.0; values.len()]];
                for (&x, &c) in col.iter().zip(y) {
                    let k = values.binary_search_by(|v| v.total_cmp(&x)).unwrap();
                    probs[c as usize][k] += 1.0;
                }
                for c in 0..2 {
                    for p in probs[c].iter_mut() {
                        *p /= counts[c];
                    }
                }
                NbFeature::Categorical { values, probs }
            }
        };
        features.push(f);
    }
    Ok(NbParams {
        prior: [counts[0] / n, counts[1] / n],
        features,
    })
}
