//! Gradient boosting on binomial deviance.
//!
//! Stage m fits a least-squares regression tree to the residuals y - p,
//! then sets each leaf to one Newton step, sum(y - p) / sum(p (1 - p)), over
//! its rows. The stage is added with factor `shrinkage`. If a shrunken leaf
//! step would raise that leaf's deviance it is halved until it does not, so
//! training deviance never increases.

use serde::{Deserialize, Serialize};

use super::tree::{BinnedFeatures, Criterion, GrowParams, Targets, Tree, TreeGrower, TreeNode};
use super::{logistic, precise_sum, softplus, BoostHyper};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    /// Log-odds of the training base rate.
    pub init: f64,
    pub shrinkage: f64,
    /// Stage trees; leaves hold unshrunken log-odds steps.
    pub trees: Vec<Tree>,
}

impl BoostParams {
    pub fn log_odds(&self, row: &[f64]) -> f64 {
        self.staged_log_odds(row, self.trees.len())
    }

    /// Log-odds after the first `m` stages.
    pub fn staged_log_odds(&self, row: &[f64], m: usize) -> f64 {
        let mut f = self.init;
        for t in &self.trees[..m] {
            f += self.shrinkage * t.predict(row);
        }
        f
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        logistic(self.log_odds(row))
    }
}

/// Per-row binomial deviance 2 (log(1 + e^f) - y f).
fn row_deviance(f: f64, y: f64) -> f64 {
    2.0 * (softplus(f) - y * f)
}

/// Mean training deviance for log-odds `f`.
pub fn mean_deviance(f: &[f64], y: &[f64]) -> f64 {
    precise_sum(f.iter().zip(y).map(|(&f, &y)| row_deviance(f, y))) / y.len() as f64
}

/// Fit; also returns the mean training deviance before stage 1 and after
/// every stage.
pub fn fit(train: &Dataset, hp: &BoostHyper) -> Result<(BoostParams, Vec<f64>)> {
    let n = train.n_rows();
    let y: Vec<f64> = train.response().iter().map(|&v| v as f64).collect();
    let share = precise_sum(y.iter().copied()) / n as f64;
    if share == 0.0 || share == 1.0 {
        return Err(Error::Training("boosting needs both classes present".into()));
    }
    let init = (share / (1.0 - share)).ln();
    let binned = BinnedFeatures::new(train);
    let weight = vec![1.0; n];
    let params = GrowParams {
        min_leaf: hp.min_obs_leaf as f64,
        max_leaves: hp.interaction_depth + 1,
        mtry: None,
    };
    let mut f = vec![init; n];
    let mut trace = vec![mean_deviance(&f, &y)];
    let mut resid = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(hp.n_trees);
    let mut leaf_of = vec![0usize; n];
    for _ in 0..hp.n_trees {
        for i in 0..n {
            let p = logistic(f[i]);
            resid[i] = y[i] - p;
            hess[i] = p * (1.0 - p);
        }
        let targets = Targets {
            weight: &weight,
            target: &resid,
            hessian: Some(&hess),
        };
        let mut tree = TreeGrower::new(&binned, targets, Criterion::Newton, params).grow(None);
        if tree.nodes.len() == 1 {
            tree = Tree::leaf(0.0);
        }
        for i in 0..n {
            leaf_of[i] = tree.leaf_index(train.row(i));
        }
        safeguard_leaves(&mut tree, &leaf_of, &f, &y, hp.shrinkage);
        for i in 0..n {
            if let TreeNode::Leaf { value } = tree.nodes[leaf_of[i]] {
                f[i] += hp.shrinkage * value;
            }
        }
        trace.push(mean_deviance(&f, &y));
        trees.push(tree);
    }
    if !trace.last().is_some_and(|d| d.is_finite()) {
        return Err(Error::Training("boosting deviance is not finite".into()));
    }
    Ok((
        BoostParams {
            init,
            shrinkage: hp.shrinkage,
            trees,
        },
        trace,
    ))
}

/// Halve any leaf step whose shrunken update would raise its rows' deviance.
fn safeguard_leaves(tree: &mut Tree, leaf_of: &[usize], f: &[f64], y: &[f64], shrinkage: f64) {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes.len()];
    for (i, &l) in leaf_of.iter().enumerate() {
        members[l].push(i);
    }
    for (node, rows) in tree.nodes.iter_mut().zip(&members) {
        let TreeNode::Leaf { value } = node else { continue };
        if rows.is_empty() || *value == 0.0 {
            continue;
        }
        let dev = |step: f64| precise_sum(rows.iter().map(|&i| row_deviance(f[i] + shrinkage * step, y[i])));
        let before = dev(0.0);
        let mut v = *value;
        let mut tries = 0;
        while !(dev(v) <= before) {
            v *= 0.5;
            tries += 1;
            if tries == 60 {
                v = 0.0;
                break;
            }
        }
        *value = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSpec;
    use rand::RngCore;

    fn hp(n_trees: usize) -> BoostHyper {
        BoostHyper {
            n_trees,
            shrinkage: 0.062,
            interaction_depth: 3,
            min_obs_leaf: 2,
        }
    }

    fn noisy(n: usize, seed: u64) -> Dataset {
        let mut rng = crate::rng::seeded(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| (rng.next_u32() % 11) as f64).collect())
            .collect();
        let y = rows
            .iter()
            .map(|r| u8::from(r[0] - r[2] + (rng.next_u32() % 9) as f64 > 4.0))
            .collect();
        let specs = (0..3).map(|t| FeatureSpec::ordinal(&format!("x{t}"), "")).collect();
        Dataset::new(specs, rows, y, vec![]).unwrap()
    }

    #[test]
    fn deviance_never_increases() {
        for seed in 0..5 {
            let d = noisy(120, seed);
            let (_, trace) = fit(&d, &hp(100)).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn separable_after_fifty_stages() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let d = Dataset::new(
            vec![FeatureSpec::continuous("x", "")],
            xs.iter().map(|&x| vec![x]).collect(),
            xs.iter().map(|&x| u8::from(x >= 20.0)).collect(),
            vec![],
        )
        .unwrap();
        let mut h = hp(50);
        h.shrinkage = 0.1;
        let (m, _) = fit(&d, &h).unwrap();
        for (row, &y) in d.rows().zip(d.response()) {
            if y == 1 {
                assert!(m.proba(row) >= 0.9, "{}", m.proba(row));
            }
        }
    }

    #[test]
    fn staged_additivity_is_exact() {
        let d = noisy(60, 9);
        let (m, _) = fit(&d, &hp(3)).unwrap();
        for row in d.rows() {
            for s in 1..=3 {
                let prev = m.staged_log_odds(row, s - 1);
                assert_eq!(m.staged_log_odds(row, s), prev + m.shrinkage * m.trees[s - 1].predict(row));
            }
            let manual = m.init
                + m.shrinkage * m.trees[0].predict(row)
                + m.shrinkage * m.trees[1].predict(row)
                + m.shrinkage * m.trees[2].predict(row);
            assert_eq!(m.proba(row), logistic(manual));
        }
    }

    #[test]
    fn trees_respect_split_budget() {
        let d = noisy(200, 3);
        let (m, _) = fit(&d, &hp(20)).unwrap();
        assert!(m.trees.iter().all(|t| t.n_splits() <= 3));
    }
}
