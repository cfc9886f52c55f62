//! Accuracy and market-share metrics, per-mode reports, k-fold
//! cross-validation and model selection.

use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{kfold_partition, Dataset, Mode};
use crate::error::{Error, Result};
use crate::models::{class_of, fit, Classifier, Hyperparams, ModelKind};
use crate::rng::mix;

/// Share of positions where `predicted` equals `truth`.
pub fn accuracy(truth: &[u8], predicted: &[u8]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Predicted shares (Q0, Q1) with Q1 the mean class-1 probability.
pub fn market_share(probs: &[f64]) -> Result<(f64, f64)> {
    if probs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Config(format!("probability {p} outside [0, 1]")));
    }
    let q1 = probs.iter().sum::<f64>() / probs.len() as f64;
    Ok((1.0 - q1, q1))
}

/// Sum of absolute share differences over both classes.
pub fn l1_norm(observed: (f64, f64), predicted: (f64, f64)) -> Result<f64> {
    for (a, b) in [observed, predicted] {
        if !((a + b) - 1.0).abs().le(&1e-9) || a < 0.0 || b < 0.0 {
            return Err(Error::Config(format!("({a}, {b}) is not a share pair")));
        }
    }
    Ok((observed.0 - predicted.0).abs() + (observed.1 - predicted.1).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub overall_accuracy: f64,
    /// Accuracy on switchers; absent when there are none.
    pub true_positive_rate: Option<f64>,
    /// Accuracy on non-switchers; absent when there are none.
    pub true_negative_rate: Option<f64>,
    pub market_share_pred: (f64, f64),
    pub market_share_obs: (f64, f64),
    pub l1_norm: f64,
}

impl MetricReport {
    pub fn from_predictions(truth: &[u8], probs: &[f64]) -> Result<Self> {
        let classes: Vec<u8> = probs.iter().map(|&p| class_of(p)).collect();
        let overall_accuracy = accuracy(truth, &classes)?;
        let rate = |label: u8| {
            let idx: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] == label).collect();
            (!idx.is_empty())
                .then(|| idx.iter().filter(|&&i| classes[i] == label).count() as f64 / idx.len() as f64)
        };
        let q1_obs = truth.iter().filter(|&&y| y == 1).count() as f64 / truth.len() as f64;
        let market_share_obs = (1.0 - q1_obs, q1_obs);
        let market_share_pred = market_share(probs)?;
        Ok(MetricReport {
            n: truth.len(),
            overall_accuracy,
            true_positive_rate: rate(1),
            true_negative_rate: rate(0),
            market_share_pred,
            market_share_obs,
            l1_norm: l1_norm(market_share_obs, market_share_pred)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    /// "All" or a mode name.
    pub segment: String,
    pub n: usize,
    /// `None` when the segment has no rows.
    pub report: Option<MetricReport>,
}

/// Metrics over all rows and per current mode.
pub fn segment_report<M: Classifier + ?Sized>(model: &M, test: &Dataset) -> Result<Vec<SegmentMetrics>> {
    let modes = test.modes()?;
    let probs: Vec<f64> = test.rows().map(|r| model.predict_proba(r)).collect::<Result<_>>()?;
    let mut out = vec![SegmentMetrics {
        segment: "All".into(),
        n: test.n_rows(),
        report: if test.n_rows() > 0 {
            Some(MetricReport::from_predictions(test.response(), &probs)?)
        } else {
            None
        },
    }];
    for mode in Mode::ALL {
        let idx: Vec<usize> = (0..test.n_rows()).filter(|&i| modes[i] == mode).collect();
        let report = if idx.is_empty() {
            None
        } else {
            let y: Vec<u8> = idx.iter().map(|&i| test.response()[i]).collect();
            let p: Vec<f64> = idx.iter().map(|&i| probs[i]).collect();
            Some(MetricReport::from_predictions(&y, &p)?)
        };
        out.push(SegmentMetrics {
            segment: mode.to_string(),
            n: idx.len(),
            report,
        });
    }
    Ok(out)
}

pub fn segment_report_csv(rows: &[SegmentMetrics]) -> String {
    let mut s = String::from("segment,n,accuracy,true_positive_rate,true_negative_rate,q0_pred,q1_pred,q0_obs,q1_obs,l1_norm\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    for r in rows {
        match &r.report {
            Some(m) => writeln!(
                s,
                "{},{},{:.4},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
                r.segment,
                r.n,
                m.overall_accuracy,
                opt(m.true_positive_rate),
                opt(m.true_negative_rate),
                m.market_share_pred.0,
                m.market_share_pred.1,
                m.market_share_obs.0,
                m.market_share_obs.1,
                m.l1_norm
            ),
            None => writeln!(s, "{},0,,,,,,,,", r.segment),
        }
        .unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScores {
    pub kind: ModelKind,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub k: usize,
    pub seed: u64,
    pub models: Vec<ModelScores>,
    pub selected_model: ModelKind,
}

impl CVReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per model and fold, then one `mean` row per model.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,fold,accuracy\n");
        for m in &self.models {
            for (f, a) in m.fold_accuracies.iter().enumerate() {
                writeln!(s, "{},{},{:.4}", m.kind, f + 1, a).unwrap();
            }
        }
        for m in &self.models {
            writeln!(s, "{},mean,{:.4}", m.kind, m.mean_accuracy).unwrap();
        }
        writeln!(s, "selected,,{}", self.selected_model).unwrap();
        s
    }

    pub fn scores(&self, kind: ModelKind) -> Option<&ModelScores> {
        self.models.iter().find(|m| m.kind == kind)
    }
}

/// Seed used to fit fold `fold` of a cross-validation run.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    mix(seed, fold as u64)
}

/// Accuracy of `kind` fit on everything outside `held_out`, scored on
/// `held_out`. A fit that fails on a degenerate fold falls back to the
/// training-fold majority class.
pub fn fold_accuracy(data: &Dataset, held_out: &[usize], kind: ModelKind, hp: &Hyperparams, seed: u64) -> Result<f64> {
    let mut mask = vec![false; data.n_rows()];
    for &i in held_out {
        mask[i] = true;
    }
    let train_idx: Vec<usize> = (0..data.n_rows()).filter(|&i| !mask[i]).collect();
    let train = data.subset(&train_idx)?;
    let test = data.subset(held_out)?;
    let predicted: Vec<u8> = match fit(kind, &train, hp, seed) {
        Ok(model) => model.predict_all(&test)?.into_iter().map(class_of).collect(),
        Err(Error::Training(msg)) => {
            warn!("{kind}: {msg}; scoring the fold with the majority class");
            vec![class_of(train.positive_share()); test.n_rows()]
        }
        Err(e) => return Err(e),
    };
    accuracy(test.response(), &predicted)
}

/// k-fold cross-validation of each kind on one shared seeded partition.
pub fn cross_validate(train: &Dataset, k: usize, kinds: &[ModelKind], hp: &Hyperparams, seed: u64) -> Result<CVReport> {
    if kinds.is_empty() {
        return Err(Error::Config("no model kinds requested".into()));
    }
    hp.validate()?;
    let folds = kfold_partition(train, k, seed)?;
    let jobs: Vec<(usize, usize)> = (0..kinds.len()).flat_map(|m| (0..k).map(move |f| (m, f))).collect();
    let accs: Vec<f64> = jobs
        .par_iter()
        .map(|&(m, f)| fold_accuracy(train, &folds[f], kinds[m], hp, fold_seed(seed, f)))
        .collect::<Result<_>>()?;
    let models: Vec<ModelScores> = kinds
        .iter()
        .enumerate()
        .map(|(m, &kind)| {
            let fold_accuracies = accs[m * k..(m + 1) * k].to_vec();
            let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
            ModelScores {
                kind,
                fold_accuracies,
                mean_accuracy,
            }
        })
        .collect();
    let selected_model = select_from(&models);
    Ok(CVReport {
        k,
        seed,
        models,
        selected_model,
    })
}

fn select_from(models: &[ModelScores]) -> ModelKind {
    models
        .iter()
        .max_by(|a, b| {
            a.mean_accuracy
                .total_cmp(&b.mean_accuracy)
                .then_with(|| b.kind.tie_rank().cmp(&a.kind.tie_rank()))
        })
        .map(|m| m.kind)
        .expect("nonempty report")
}

/// Highest mean accuracy; ties go to the earlier kind in boost, rf, bag,
/// nn, logit, nb, cart.
pub fn select_model(report: &CVReport) -> Result<ModelKind> {
    if report.models.is_empty() {
        return Err(Error::Config("empty cross-validation report".into()));
    }
    Ok(select_from(&report.models))
}
