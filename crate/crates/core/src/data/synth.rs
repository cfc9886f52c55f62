//! Seeded synthetic stated-preference data with a planted switching model.
//!
//! Each row draws a current mode from `mode_shares`, then every feature in
//! `marginal_targets` order, then the response. Continuous features come
//! from normals truncated to `[min, max]` whose parameters are solved so the
//! truncated mean and SD hit the targets; discrete-ordinal features come
//! from the maximum-entropy categorical on their support with the target
//! mean and SD; binary features are Bernoulli(mean). The response is
//! Bernoulli(logistic(U)) where U is the current mode's utility: an
//! intercept, linear terms, hinge terms `slope * max(0, x - breakpoint)`
//! and step terms adding `jump` when `x > breakpoint`.
//!
//! All draws come from a single ChaCha8 stream seeded with `seed`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{Dataset, FeatureKind, FeatureSpec, Mode};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

pub const MODE_INDICATORS: [&str; 3] = ["Current_Mode_Car", "Current_Mode_Walk", "Current_Mode_Bike"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalTarget {
    pub feature: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub unit: String,
    pub mean: f64,
    #[serde(default)]
    pub sd: f64,
    #[serde(default)]
    pub min: f64,
    #[serde(default = "one")]
    pub max: f64,
    /// Values a discrete-ordinal feature can take; defaults to the integers
    /// in `[min, max]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<f64>>,
    /// Decimal places continuous draws are rounded to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimals: Option<u32>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeShares {
    pub car: f64,
    pub walk: f64,
    pub bike: f64,
    pub bus: f64,
}

impl ModeShares {
    fn as_array(&self) -> [f64; 4] {
        [self.car, self.walk, self.bike, self.bus]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hinge {
    pub feature: String,
    pub breakpoint: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub feature: String,
    pub breakpoint: f64,
    pub jump: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SegmentUtility {
    pub intercept: f64,
    #[serde(default)]
    pub linear: BTreeMap<String, f64>,
    #[serde(default)]
    pub hinges: Vec<Hinge>,
    #[serde(default)]
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UtilitySpec {
    pub car: SegmentUtility,
    pub walk: SegmentUtility,
    pub bike: SegmentUtility,
    pub bus: SegmentUtility,
}

impl UtilitySpec {
    pub fn segment(&self, mode: Mode) -> &SegmentUtility {
        match mode {
            Mode::Car => &self.car,
            Mode::Walk => &self.walk,
            Mode::Bike => &self.bike,
            Mode::Bus => &self.bus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_rows: usize,
    pub seed: u64,
    pub marginal_targets: Vec<MarginalTarget>,
    pub mode_shares: ModeShares,
    pub utility_spec: UtilitySpec,
}

fn continuous(name: &str, unit: &str, min: f64, max: f64, mean: f64, sd: f64, decimals: u32) -> MarginalTarget {
    MarginalTarget {
        feature: name.into(),
        kind: FeatureKind::Continuous,
        unit: unit.into(),
        mean,
        sd,
        min,
        max,
        support: None,
        decimals: Some(decimals),
    }
}

fn ordinal(name: &str, unit: &str, min: f64, max: f64, mean: f64, sd: f64, support: Option<Vec<f64>>) -> MarginalTarget {
    MarginalTarget {
        feature: name.into(),
        kind: FeatureKind::DiscreteOrdinal,
        unit: unit.into(),
        mean,
        sd,
        min,
        max,
        support,
        decimals: None,
    }
}

fn binary(name: &str, share: f64) -> MarginalTarget {
    MarginalTarget {
        feature: name.into(),
        kind: FeatureKind::Binary,
        unit: "indicator".into(),
        mean: share,
        sd: 0.0,
        min: 0.0,
        max: 1.0,
        support: None,
        decimals: None,
    }
}

fn segment(
    intercept: f64,
    linear: &[(&str, f64)],
    hinges: &[(&str, f64, f64)],
    steps: &[(&str, f64, f64)],
) -> SegmentUtility {
    SegmentUtility {
        intercept,
        linear: linear.iter().map(|&(f, c)| (f.to_string(), c)).collect(),
        hinges: hinges
            .iter()
            .map(|&(f, b, s)| Hinge {
                feature: f.to_string(),
                breakpoint: b,
                slope: s,
            })
            .collect(),
        steps: steps
            .iter()
            .map(|&(f, b, j)| Step {
                feature: f.to_string(),
                breakpoint: b,
                jump: j,
            })
            .collect(),
    }
}

impl Default for SynthConfig {
    /// 8141 rows with the survey's marginal statistics. The planted utility
    /// is flat in TT_MOD below 10 minutes and decreasing above, with a
    /// further drop past 25 minutes; the second transfer costs more than
    /// the first; long trips by the current mode and car ownership act as
    /// thresholds. Car users get the strongest rideshare penalty and Bus
    /// users the weakest. Intercepts put the per-mode switching shares near
    /// 0.41 (Car), 0.20 (Walk), 0.13 (Bike) and 0.55 (Bus).
    fn default() -> Self {
        let marginal_targets = vec![
            continuous("TT_Drive", "min", 2.0, 40.0, 15.21, 6.62, 0),
            continuous("TT_Walk", "min", 3.0, 120.0, 32.30, 23.08, 0),
            continuous("TT_Bike", "min", 1.0, 55.0, 15.34, 10.45, 0),
            continuous("TT_MOD", "min", 6.2, 34.0, 18.68, 4.75, 1),
            ordinal("Wait_Time", "min", 3.0, 8.0, 5.00, 2.07, Some(vec![3.0, 5.0, 8.0])),
            ordinal("Transfer", "count", 0.0, 2.0, 0.33, 0.65, None),
            ordinal("Rideshare", "count", 0.0, 2.0, 1.11, 0.82, None),
            ordinal("Income", "level", 1.0, 6.0, 1.93, 1.34, None),
            ordinal("Bike_Walkability", "level", 1.0, 4.0, 3.22, 0.95, None),
            ordinal("MOD_Access", "level", 1.0, 4.0, 3.09, 1.02, None),
            continuous("CarPerCap", "cars/person", 0.0, 3.0, 0.53, 0.48, 2),
            binary("Female", 0.5632),
            binary("Student", 0.7352),
        ];
        let social: [(&str, f64); 3] = [("Student", 0.8), ("MOD_Access", 0.9), ("Income", -0.3)];
        let with_social = |own: &[(&'static str, f64)]| -> Vec<(&'static str, f64)> {
            own.iter().copied().chain(social.iter().copied()).collect()
        };
        let utility_spec = UtilitySpec {
            car: segment(
                6.13,
                &with_social(&[
                    ("TT_Drive", 0.06),
                    ("Wait_Time", -0.8),
                    ("Transfer", -2.0),
                    ("Rideshare", -2.2),
                    ("CarPerCap", -0.6),
                ]),
                &[("TT_MOD", 10.0, -0.48), ("Transfer", 1.0, -1.4)],
                &[("TT_Drive", 15.0, 3.2), ("CarPerCap", 0.75, -3.0), ("TT_MOD", 25.0, -2.0)],
            ),
            walk: segment(
                2.50,
                &with_social(&[
                    ("TT_Walk", 0.02),
                    ("Wait_Time", -0.6),
                    ("Transfer", -0.9),
                    ("Rideshare", -1.1),
                    ("Bike_Walkability", -0.5),
                ]),
                &[("TT_MOD", 10.0, -0.52), ("TT_MOD", 20.0, 0.28), ("Transfer", 1.0, -0.6)],
                &[("TT_Walk", 30.0, 3.0), ("TT_MOD", 25.0, -2.0)],
            ),
            bike: segment(
                1.73,
                &with_social(&[
                    ("TT_Bike", 0.04),
                    ("Wait_Time", -0.6),
                    ("Transfer", -0.9),
                    ("Rideshare", -0.9),
                    ("Bike_Walkability", -0.7),
                ]),
                &[("TT_MOD", 10.0, -0.52), ("TT_MOD", 20.0, 0.28), ("Transfer", 1.0, -0.6)],
                &[("TT_Bike", 15.0, 3.0), ("TT_MOD", 25.0, -2.0)],
            ),
            bus: segment(
                5.87,
                &with_social(&[
                    ("TT_Walk", 0.01),
                    ("Wait_Time", -0.5),
                    ("Transfer", -2.0),
                    ("Rideshare", -0.7),
                    ("CarPerCap", -0.4),
                ]),
                &[("TT_MOD", 10.0, -0.48), ("Transfer", 1.0, -1.4)],
                &[("TT_Walk", 40.0, 2.0), ("CarPerCap", 0.75, -2.4), ("TT_MOD", 25.0, -2.0)],
            ),
        };
        SynthConfig {
            n_rows: 8141,
            seed: 42,
            marginal_targets,
            // Bus is the residual of the three reported mode shares.
            mode_shares: ModeShares {
                car: 0.1668,
                walk: 0.4041,
                bike: 0.0825,
                bus: 1.0 - 0.1668 - 0.4041 - 0.0825,
            },
            utility_spec,
        }
    }
}

impl SynthConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Feature metadata of the generated dataset, in column order.
    pub fn feature_specs(&self) -> Vec<FeatureSpec> {
        let mut specs: Vec<FeatureSpec> = self
            .marginal_targets
            .iter()
            .map(|t| FeatureSpec::new(&t.feature, t.kind, &t.unit, t.min, t.max))
            .collect();
        specs.extend(MODE_INDICATORS.iter().map(|n| FeatureSpec::binary(n)));
        specs
    }

    pub fn compile(&self) -> Result<Generator> {
        Generator::new(self)
    }
}

/// Sampler for one feature.
#[derive(Debug, Clone)]
enum Marginal {
    Truncated { mu: f64, sigma: f64, lo: f64, hi: f64, scale: Option<f64> },
    Categorical { values: Vec<f64>, cdf: Vec<f64> },
    Bernoulli(f64),
}

#[derive(Debug, Clone)]
struct CompiledUtility {
    intercept: f64,
    linear: Vec<(usize, f64)>,
    hinges: Vec<(usize, f64, f64)>,
    steps: Vec<(usize, f64, f64)>,
}

impl CompiledUtility {
    fn eval(&self, row: &[f64]) -> f64 {
        let mut u = self.intercept;
        for &(t, c) in &self.linear {
            u += c * row[t];
        }
        for &(t, b, s) in &self.hinges {
            u += s * (row[t] - b).max(0.0);
        }
        for &(t, b, j) in &self.steps {
            if row[t] > b {
                u += j;
            }
        }
        u
    }
}

/// A validated, compiled generator.
#[derive(Debug, Clone)]
pub struct Generator {
    config: SynthConfig,
    specs: Vec<FeatureSpec>,
    marginals: Vec<Marginal>,
    mode_cdf: [f64; 4],
    utilities: [CompiledUtility; 4],
}

pub fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

impl Generator {
    fn new(config: &SynthConfig) -> Result<Self> {
        let shares = config.mode_shares.as_array();
        if shares.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
            return Err(Error::Config("mode shares must lie in [0, 1]".into()));
        }
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("mode shares sum to {total}, not 1")));
        }
        let mut mode_cdf = [0.0; 4];
        let mut acc = 0.0;
        for (k, s) in shares.iter().enumerate() {
            acc += s;
            mode_cdf[k] = acc;
        }
        mode_cdf[3] = f64::INFINITY;

        let specs = config.feature_specs();
        for (i, a) in specs.iter().enumerate() {
            if specs[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("duplicate feature {:?}", a.name)));
            }
        }
        let marginals = config
            .marginal_targets
            .iter()
            .map(compile_marginal)
            .collect::<Result<Vec<_>>>()?;

        let index_of = |name: &str| {
            specs
                .iter()
                .position(|s| s.name == name)
                .ok_or_else(|| Error::Config(format!("utility refers to unknown feature {name:?}")))
        };
        let compile_segment = |seg: &SegmentUtility| -> Result<CompiledUtility> {
            Ok(CompiledUtility {
                intercept: seg.intercept,
                linear: seg
                    .linear
                    .iter()
                    .map(|(f, &c)| Ok((index_of(f)?, c)))
                    .collect::<Result<_>>()?,
                hinges: seg
                    .hinges
                    .iter()
                    .map(|h| Ok((index_of(&h.feature)?, h.breakpoint, h.slope)))
                    .collect::<Result<_>>()?,
                steps: seg
                    .steps
                    .iter()
                    .map(|h| Ok((index_of(&h.feature)?, h.breakpoint, h.jump)))
                    .collect::<Result<_>>()?,
            })
        };
        let u = &config.utility_spec;
        let utilities = [
            compile_segment(&u.car)?,
            compile_segment(&u.walk)?,
            compile_segment(&u.bike)?,
            compile_segment(&u.bus)?,
        ];
        Ok(Generator {
            config: config.clone(),
            specs,
            marginals,
            mode_cdf,
            utilities,
        })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    /// Planted switching probability for a row; the mode is read from the
    /// trailing indicator columns.
    pub fn planted_probability(&self, row: &[f64]) -> f64 {
        let p = self.specs.len();
        let ind = &row[p - 3..];
        let mode = match ind.iter().position(|&x| x == 1.0) {
            Some(k) => Mode::ALL[k],
            None => Mode::Bus,
        };
        logistic(self.utilities[mode.index()].eval(row))
    }

    /// Generate the dataset together with each row's planted probability.
    pub fn generate(&self) -> Result<(Dataset, Vec<f64>)> {
        let n = self.config.n_rows;
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let p = self.specs.len();
        let n_targets = self.marginals.len();
        let mut rng = rng::seeded(self.config.seed);
        let mut values = Vec::with_capacity(n * p);
        let mut response = Vec::with_capacity(n);
        let mut probs = Vec::with_capacity(n);
        let mut row = vec![0.0; p];
        for _ in 0..n {
            let u: f64 = rng.random();
            let mode = Mode::ALL[self.mode_cdf.iter().position(|&c| u < c).unwrap_or(3)];
            for (t, m) in self.marginals.iter().enumerate() {
                row[t] = sample(m, &mut rng);
            }
            for k in 0..3 {
                row[n_targets + k] = if mode.index() == k { 1.0 } else { 0.0 };
            }
            let prob = logistic(self.utilities[mode.index()].eval(&row));
            let y = u8::from(rng.random::<f64>() < prob);
            values.extend_from_slice(&row);
            response.push(y);
            probs.push(prob);
        }
        let keys = MODE_INDICATORS.iter().map(|s| s.to_string()).collect();
        Ok((Dataset::from_flat(self.specs.clone(), values, response, keys)?, probs))
    }
}

/// Generate the dataset described by `config`.
pub fn synthesize(config: &SynthConfig) -> Result<Dataset> {
    Ok(config.compile()?.generate()?.0)
}

fn sample(m: &Marginal, rng: &mut Rng) -> f64 {
    match m {
        Marginal::Truncated { mu, sigma, lo, hi, scale } => loop {
            let z: f64 = rng.sample(StandardNormal);
            let mut x = mu + sigma * z;
            if x < *lo || x > *hi {
                continue;
            }
            if let Some(s) = scale {
                x = ((x * s).round() / s).clamp(*lo, *hi);
            }
            break x;
        },
        Marginal::Categorical { values, cdf } => {
            let u: f64 = rng.random();
            let k = cdf.iter().position(|&c| u < c).unwrap_or(values.len() - 1);
            values[k]
        }
        Marginal::Bernoulli(p) => {
            if rng.random::<f64>() < *p {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn compile_marginal(t: &MarginalTarget) -> Result<Marginal> {
    let bad = |why: &str| Error::Config(format!("target for {}: {why}", t.feature));
    if !(t.min <= t.max) {
        return Err(bad("min exceeds max"));
    }
    match t.kind {
        FeatureKind::Binary => {
            if !(0.0..=1.0).contains(&t.mean) {
                return Err(bad("binary share must lie in [0, 1]"));
            }
            Ok(Marginal::Bernoulli(t.mean))
        }
        FeatureKind::Continuous => {
            if !(t.sd > 0.0) || !(t.mean > t.min && t.mean < t.max) {
                return Err(bad("needs sd > 0 and min < mean < max"));
            }
            let (mu, sigma) = fit_truncated_normal(t.mean, t.sd, t.min, t.max).ok_or_else(|| bad("cannot match mean/SD with a truncated normal"))?;
            let mass = normal_cdf((t.max - mu) / sigma) - normal_cdf((t.min - mu) / sigma);
            if mass < 1e-6 {
                return Err(bad("truncation leaves too little mass to sample"));
            }
            Ok(Marginal::Truncated {
                mu,
                sigma,
                lo: t.min,
                hi: t.max,
                scale: t.decimals.map(|d| 10f64.powi(d as i32)),
            })
        }
        FeatureKind::DiscreteOrdinal => {
            let support = match &t.support {
                Some(s) => s.clone(),
                None => {
                    if t.min.fract() != 0.0 || t.max.fract() != 0.0 {
                        return Err(bad("default support needs integer bounds"));
                    }
                    (t.min as i64..=t.max as i64).map(|v| v as f64).collect()
                }
            };
            if support.len() < 2 || support.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad("support must be strictly increasing with at least two values"));
            }
            if support.iter().any(|v| v.fract() != 0.0) {
                return Err(bad("support values must be integers"));
            }
            let probs = fit_categorical(&support, t.mean, t.sd).ok_or_else(|| bad("cannot match mean/SD on the support"))?;
            let mut acc = 0.0;
            let mut cdf: Vec<f64> = probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            *cdf.last_mut().unwrap() = f64::INFINITY;
            Ok(Marginal::Categorical { values: support, cdf })
        }
    }
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Mean and SD of N(mu, sigma²) truncated to [lo, hi].
pub fn truncated_moments(mu: f64, sigma: f64, lo: f64, hi: f64) -> (f64, f64) {
    let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
    let z = normal_cdf(b) - normal_cdf(a);
    let (pa, pb) = (normal_pdf(a), normal_pdf(b));
    let r = (pa - pb) / z;
    let mean = mu + sigma * r;
    let var = sigma * sigma * (1.0 + (a * pa - b * pb) / z - r * r);
    (mean, var.max(0.0).sqrt())
}

/// Solve for the untruncated (mu, sigma) whose truncation to [lo, hi] has
/// the given mean and SD. Damped Newton on (mu, ln sigma).
pub fn fit_truncated_normal(mean: f64, sd: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let resid = |mu: f64, ls: f64| {
        let (m, s) = truncated_moments(mu, ls.exp(), lo, hi);
        [(m - mean) / sd, (s - sd) / sd]
    };
    let norm = |r: [f64; 2]| (r[0] * r[0] + r[1] * r[1]).sqrt();
    let (mut mu, mut ls) = (mean, sd.ln());
    let mut r = resid(mu, ls);
    for _ in 0..200 {
        if !norm(r).is_finite() {
            return None;
        }
        if norm(r) < 1e-12 {
            return Some((mu, ls.exp()));
        }
        let (hm, hs) = (1e-6 * sd, 1e-6);
        let rm = resid(mu + hm, ls);
        let rm2 = resid(mu - hm, ls);
        let rs = resid(mu, ls + hs);
        let rs2 = resid(mu, ls - hs);
        let j = [
            [(rm[0] - rm2[0]) / (2.0 * hm), (rs[0] - rs2[0]) / (2.0 * hs)],
            [(rm[1] - rm2[1]) / (2.0 * hm), (rs[1] - rs2[1]) / (2.0 * hs)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dmu = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dls = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut step = 1.0;
        loop {
            let (nmu, nls) = (mu - step * dmu, ls - step * dls.clamp(-2.0, 2.0));
            let nr = resid(nmu, nls);
            if norm(nr).is_finite() && norm(nr) < norm(r) {
                mu = nmu;
                ls = nls;
                r = nr;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return (norm(r) < 1e-9).then(|| (mu, ls.exp()));
            }
        }
    }
    (norm(r) < 1e-9).then(|| (mu, ls.exp()))
}

/// Maximum-entropy distribution on `support` with the given mean and SD:
/// p_k ∝ exp(a z_k + b z_k²) with z the standardized support. Newton on the
/// convex dual.
pub fn fit_categorical(support: &[f64], mean: f64, sd: f64) -> Option<Vec<f64>> {
    if !(sd > 0.0) {
        return None;
    }
    let z: Vec<f64> = support.iter().map(|x| (x - mean) / sd).collect();
    let probs = |a: f64, b: f64| -> Vec<f64> {
        let e: Vec<f64> = z.iter().map(|&zk| a * zk + b * zk * zk).collect();
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = e.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    };
    let dual = |a: f64, b: f64| -> f64 {
        let e: Vec<f64> = z.iter().map(|&zk| a * zk + b * zk * zk).collect();
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + e.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - b
    };
    let (mut a, mut b) = (0.0, 0.0);
    for _ in 0..500 {
        let p = probs(a, b);
        let e1: f64 = p.iter().zip(&z).map(|(p, z)| p * z).sum();
        let e2: f64 = p.iter().zip(&z).map(|(p, z)| p * z * z).sum();
        let e3: f64 = p.iter().zip(&z).map(|(p, z)| p * z.powi(3)).sum();
        let e4: f64 = p.iter().zip(&z).map(|(p, z)| p * z.powi(4)).sum();
        let g = [e1, e2 - 1.0];
        if g[0].abs() < 1e-13 && g[1].abs() < 1e-13 {
            return Some(p);
        }
        let h = [[e2 - e1 * e1, e3 - e1 * e2], [e3 - e1 * e2, e4 - e2 * e2]];
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let (da, db) = if det.abs() > 1e-300 {
            ((h[1][1] * g[0] - h[0][1] * g[1]) / det, (-h[1][0] * g[0] + h[0][0] * g[1]) / det)
        } else {
            (g[0], g[1])
        };
        let f0 = dual(a, b);
        let mut step = 1.0;
        while dual(a - step * da, b - step * db) > f0 && step > 1e-12 {
            step *= 0.5;
        }
        a -= step * da;
        b -= step * db;
    }
    let p = probs(a, b);
    let e1: f64 = p.iter().zip(&z).map(|(p, z)| p * z).sum();
    let e2: f64 = p.iter().zip(&z).map(|(p, z)| p * z * z).sum();
    (e1.abs() < 1e-8 && (e2 - 1.0).abs() < 1e-8).then_some(p)
}
