//! Single classification trees and bootstrap ensembles of them.
//!
//! Tree `t` of a forest draws its bootstrap from `stream(seed, 2t)` and its
//! per-split feature subsets from `stream(seed, 2t + 1)`, so trees can be
//! grown in any order and a forest with `mtry = p` matches bagging draw for
//! draw.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{BinnedFeatures, Criterion, GrowParams, Targets, Tree, TreeGrower};
use super::{BagHyper, CartHyper, RfHyper};
use crate::data::Dataset;
use crate::rng::{stream, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Mean of the trees' leaf probabilities, summed in tree order.
    pub fn proba(&self, row: &[f64]) -> f64 {
        let s: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        s / self.trees.len() as f64
    }
}

fn response_f64(data: &Dataset) -> Vec<f64> {
    data.response().iter().map(|&y| y as f64).collect()
}

fn gini_tree(binned: &BinnedFeatures, weight: &[f64], y: &[f64], params: GrowParams, rng: Option<&mut Rng>) -> Tree {
    let targets = Targets {
        weight,
        target: y,
        hessian: None,
    };
    TreeGrower::new(binned, targets, Criterion::Gini, params).grow(rng)
}

pub fn fit_cart_tree(data: &Dataset, hp: &CartHyper) -> Tree {
    let binned = BinnedFeatures::new(data);
    let y = response_f64(data);
    let w = vec![1.0; data.n_rows()];
    let params = GrowParams {
        min_leaf: hp.min_obs_leaf as f64,
        max_leaves: hp.max_leaves,
        mtry: None,
    };
    gini_tree(&binned, &w, &y, params, None)
}

/// Bootstrap multiplicities of a size-n resample.
pub fn bootstrap_weights(n: usize, rng: &mut Rng) -> Vec<f64> {
    let mut w = vec![0.0; n];
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1.0;
    }
    w
}

fn fit_forest(data: &Dataset, n_trees: usize, min_leaf: usize, mtry: Option<usize>, bootstrap: bool, seed: u64) -> Forest {
    let binned = BinnedFeatures::new(data);
    let y = response_f64(data);
    let n = data.n_rows();
    let params = GrowParams {
        min_leaf: min_leaf as f64,
        max_leaves: usize::MAX,
        mtry,
    };
    let trees = (0..n_trees as u64)
        .into_par_iter()
        .map(|t| {
            let w = if bootstrap {
                bootstrap_weights(n, &mut stream(seed, 2 * t))
            } else {
                vec![1.0; n]
            };
            let mut feature_rng = stream(seed, 2 * t + 1);
            gini_tree(&binned, &w, &y, params, Some(&mut feature_rng))
        })
        .collect();
    Forest { trees }
}

pub fn fit_bag(data: &Dataset, hp: &BagHyper, seed: u64) -> Forest {
    fit_forest(data, hp.n_trees, hp.min_obs_leaf, None, hp.bootstrap, seed)
}

pub fn fit_rf(data: &Dataset, hp: &RfHyper, seed: u64) -> Forest {
    fit_forest(data, hp.n_trees, hp.min_obs_leaf, Some(hp.mtry), true, seed)
}
