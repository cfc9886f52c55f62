//! The seven soft classifiers behind one probability contract.

pub mod boost;
pub mod forest;
pub mod logit;
pub mod nb;
pub mod nn;
pub mod tree;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureSpec};
use crate::error::{Error, Result};

pub use boost::BoostParams;
pub use forest::Forest;
pub use logit::LogitParams;
pub use nb::NbParams;
pub use nn::NnParams;
pub use tree::{Tree, TreeNode};

/// Anything that maps a feature row to a class-1 probability.
pub trait Classifier: Sync {
    fn n_features(&self) -> usize;

    /// Class-1 probability without a length check.
    fn proba(&self, row: &[f64]) -> f64;

    fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features() {
            return Err(Error::LengthMismatch {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(self.proba(row))
    }

    /// Argmax of (1 - p, p); an exact tie (p = 0.5) goes to class 1.
    fn predict_class(&self, row: &[f64]) -> Result<u8> {
        Ok(class_of(self.predict_proba(row)?))
    }
}

pub fn class_of(p1: f64) -> u8 {
    u8::from(p1 >= 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logit,
    Nb,
    Cart,
    Bag,
    Boost,
    Rf,
    Nn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Logit,
        ModelKind::Nb,
        ModelKind::Cart,
        ModelKind::Bag,
        ModelKind::Boost,
        ModelKind::Rf,
        ModelKind::Nn,
    ];

    /// Preference order used to break ties in model selection.
    pub const TIE_ORDER: [ModelKind; 7] = [
        ModelKind::Boost,
        ModelKind::Rf,
        ModelKind::Bag,
        ModelKind::Nn,
        ModelKind::Logit,
        ModelKind::Nb,
        ModelKind::Cart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logit => "logit",
            ModelKind::Nb => "nb",
            ModelKind::Cart => "cart",
            ModelKind::Bag => "bag",
            ModelKind::Boost => "boost",
            ModelKind::Rf => "rf",
            ModelKind::Nn => "nn",
        }
    }

    pub fn tie_rank(self) -> usize {
        Self::TIE_ORDER.iter().position(|&k| k == self).unwrap()
    }

    pub fn is_tree_ensemble(self) -> bool {
        matches!(self, ModelKind::Boost | ModelKind::Rf | ModelKind::Bag)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostHyper {
    pub n_trees: usize,
    pub shrinkage: f64,
    /// Maximum number of splits per tree.
    pub interaction_depth: usize,
    pub min_obs_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BagHyper {
    pub n_trees: usize,
    pub min_obs_leaf: usize,
    /// When false every tree sees the full training set once.
    #[serde(default = "yes")]
    pub bootstrap: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfHyper {
    pub n_trees: usize,
    pub mtry: usize,
    pub min_obs_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnHyper {
    pub hidden_units: usize,
    pub weight_decay: f64,
    pub step_size: f64,
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartHyper {
    pub min_obs_leaf: usize,
    pub max_leaves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitHyper {
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbHyper {
    pub variance_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub boost: BoostHyper,
    pub bag: BagHyper,
    pub rf: RfHyper,
    pub nn: NnHyper,
    pub cart: CartHyper,
    pub logit: LogitHyper,
    pub nb: NbHyper,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            boost: BoostHyper {
                n_trees: 500,
                shrinkage: 0.062,
                interaction_depth: 45,
                min_obs_leaf: 10,
            },
            bag: BagHyper {
                n_trees: 500,
                min_obs_leaf: 1,
                bootstrap: true,
            },
            rf: RfHyper {
                n_trees: 600,
                mtry: 14,
                min_obs_leaf: 1,
            },
            nn: NnHyper {
                hidden_units: 14,
                weight_decay: 0.1,
                step_size: 2.0,
                max_iter: 1000,
                tol: 1e-5,
            },
            cart: CartHyper {
                min_obs_leaf: 5,
                max_leaves: 6,
            },
            logit: LogitHyper { max_iter: 100, tol: 1e-8 },
            nb: NbHyper { variance_floor: 1e-9 },
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let b = &self.boost;
        if b.n_trees == 0 || b.interaction_depth == 0 || b.min_obs_leaf == 0 {
            return bad("boost counts must be positive");
        }
        if !(b.shrinkage > 0.0 && b.shrinkage <= 1.0) {
            return bad("boost shrinkage must lie in (0, 1]");
        }
        if self.bag.n_trees == 0 || self.bag.min_obs_leaf == 0 {
            return bad("bag counts must be positive");
        }
        if self.rf.n_trees == 0 || self.rf.mtry == 0 || self.rf.min_obs_leaf == 0 {
            return bad("rf counts must be positive");
        }
        if self.nn.hidden_units == 0 {
            return bad("nn needs at least one hidden unit");
        }
        if self.nn.max_iter == 0 || !(self.nn.step_size > 0.0) || !(self.nn.weight_decay >= 0.0) {
            return bad("nn step size and iteration cap must be positive, weight decay non-negative");
        }
        if self.cart.min_obs_leaf == 0 || self.cart.max_leaves == 0 {
            return bad("cart counts must be positive");
        }
        if self.logit.max_iter == 0 {
            return bad("logit iteration cap must be positive");
        }
        if !(self.nb.variance_floor > 0.0) {
            return bad("nb variance floor must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Params {
    Logit(LogitParams),
    Nb(NbParams),
    Cart(Tree),
    Bag(Forest),
    Boost(BoostParams),
    Rf(Forest),
    Nn(NnParams),
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted model: its kind, the hyperparameters it was fit with, the
/// fitted parameters, and the training feature metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftClassifier {
    pub format_version: u32,
    pub kind: ModelKind,
    pub hyperparams: Hyperparams,
    pub feature_specs: Vec<FeatureSpec>,
    pub params: Params,
}

impl Classifier for SoftClassifier {
    fn n_features(&self) -> usize {
        self.feature_specs.len()
    }

    fn proba(&self, row: &[f64]) -> f64 {
        let p = match &self.params {
            Params::Logit(m) => m.proba(row),
            Params::Nb(m) => m.proba(row),
            Params::Cart(t) => t.predict(row),
            Params::Bag(f) | Params::Rf(f) => f.proba(row),
            Params::Boost(m) => m.proba(row),
            Params::Nn(m) => m.proba(row),
        };
        p.clamp(0.0, 1.0)
    }
}

impl SoftClassifier {
    fn new(kind: ModelKind, hp: &Hyperparams, data: &Dataset, params: Params) -> Self {
        SoftClassifier {
            format_version: MODEL_FORMAT_VERSION,
            kind,
            hyperparams: hp.clone(),
            feature_specs: data.specs().to_vec(),
            params,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SoftClassifier = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion(model.format_version));
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Class-1 probability for every row of `data`.
    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.n_features() != self.n_features() {
            return Err(Error::LengthMismatch {
                expected: self.n_features(),
                got: data.n_features(),
            });
        }
        Ok(data.rows().map(|r| self.proba(r)).collect())
    }
}

fn require_rows(data: &Dataset) -> Result<()> {
    if data.n_rows() == 0 {
        Err(Error::Training("training set is empty".into()))
    } else {
        Ok(())
    }
}

pub fn fit_logit(train: &Dataset, hp: &Hyperparams) -> Result<SoftClassifier> {
    hp.validate()?;
    require_rows(train)?;
    let params = logit::fit(train, &hp.logit)?;
    Ok(SoftClassifier::new(ModelKind::Logit, hp, train, Params::Logit(params)))
}

pub fn fit_nb(train: &Dataset, hp: &Hyperparams) -> Result<SoftClassifier> {
    hp.validate()?;
    require_rows(train)?;
    let params = nb::fit(train, &hp.nb)?;
    Ok(SoftClassifier::new(ModelKind::Nb, hp, train, Params::Nb(params)))
}

pub fn fit_cart(train: &Dataset, hp: &Hyperparams) -> Result<SoftClassifier> {
    hp.validate()?;
    require_rows(train)?;
    let tree = forest::fit_cart_tree(train, &hp.cart);
    Ok(SoftClassifier::new(ModelKind::Cart, hp, train, Params::Cart(tree)))
}

pub fn fit_bag(train: &Dataset, hp: &Hyperparams, seed: u64) -> Result<SoftClassifier> {
    hp.validate()?;
    require_rows(train)?;
    let f = forest::fit_bag(train, &hp.bag, seed);
    Ok(SoftClassifier::new(ModelKind::Bag, hp, train, Params::Bag(f)))
}

pub fn fit_rf(train: &Dataset, hp: &Hyperparams, seed: u64) -> Result<SoftClassifier> {
    hp.validate()?;
    require_rows(train)?;
    if hp.rf.mtry > train.n_features() {
        return Err(Error::Config(format!(
            "mtry = {} exceeds the {} features",
            hp.rf.mtry,
            train.n_features()
        )));
    }
    let f = forest::fit_rf(train, &hp.rf, seed);
    Ok(SoftClassifier::new(ModelKind::Rf, hp, train, Params::Rf(f)))
}

pub fn fit_boost(train: &Dataset, hp: &Hyperparams) -> Result<SoftClassifier> {
    hp.validate()?;
    require_rows(train)?;
    let (params, _) = boost::fit(train, &hp.boost)?;
    Ok(SoftClassifier::new(ModelKind::Boost, hp, train, Params::Boost(params)))
}

pub fn fit_nn(train: &Dataset, hp: &Hyperparams, seed: u64) -> Result<SoftClassifier> {
    hp.validate()?;
    require_rows(train)?;
    let (params, _) = nn::fit(train, &hp.nn, seed)?;
    Ok(SoftClassifier::new(ModelKind::Nn, hp, train, Params::Nn(params)))
}

/// Fit any kind; deterministic learners ignore `seed`.
pub fn fit(kind: ModelKind, train: &Dataset, hp: &Hyperparams, seed: u64) -> Result<SoftClassifier> {
    match kind {
        ModelKind::Logit => fit_logit(train, hp),
        ModelKind::Nb => fit_nb(train, hp),
        ModelKind::Cart => fit_cart(train, hp),
        ModelKind::Bag => fit_bag(train, hp, seed),
        ModelKind::Rf => fit_rf(train, hp, seed),
        ModelKind::Boost => fit_boost(train, hp),
        ModelKind::Nn => fit_nn(train, hp, seed),
    }
}

/// Numerically stable logistic function.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Neumaier-compensated sum.
pub(crate) fn precise_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
