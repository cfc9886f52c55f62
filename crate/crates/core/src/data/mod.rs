//! Tabular data: feature metadata, the in-memory dataset, CSV ingestion,
//! the synthetic stated-preference generator, splitting, and diagnostics.

mod crosstab;
mod csv_io;
mod split;
pub mod synth;
mod vif;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crosstab::{crosstab, CrossTab};
pub use csv_io::{load_csv, read_csv, write_csv, RESPONSE_COLUMN};
pub use split::{kfold_partition, stratified_split, Split};
pub use synth::{synthesize, SynthConfig};
pub use vif::{vif, Vif};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Continuous,
    DiscreteOrdinal,
    Binary,
}

/// Metadata for one feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub unit: String,
    pub observed_min: f64,
    pub observed_max: f64,
}

impl FeatureSpec {
    pub fn new(name: &str, kind: FeatureKind, unit: &str, min: f64, max: f64) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind,
            unit: unit.to_string(),
            observed_min: min,
            observed_max: max,
        }
    }

    pub fn continuous(name: &str, unit: &str) -> Self {
        Self::new(name, FeatureKind::Continuous, unit, 0.0, 0.0)
    }

    pub fn ordinal(name: &str, unit: &str) -> Self {
        Self::new(name, FeatureKind::DiscreteOrdinal, unit, 0.0, 0.0)
    }

    pub fn binary(name: &str) -> Self {
        Self::new(name, FeatureKind::Binary, "indicator", 0.0, 1.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.observed_min && x <= self.observed_max
    }
}

/// Ordered feature list plus the names of the current-mode indicator
/// columns (Car, Walk, Bike; all-zero means Bus).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub features: Vec<FeatureSpec>,
    pub segment_keys: Vec<String>,
}

pub const TT_MOD: &str = "TT_MOD";
pub const WAIT_TIME: &str = "Wait_Time";
pub const TRANSFER: &str = "Transfer";
pub const RIDESHARE: &str = "Rideshare";

/// The four level-of-service attributes of the on-demand service.
pub const LEVEL_OF_SERVICE: [&str; 4] = [TT_MOD, WAIT_TIME, TRANSFER, RIDESHARE];

impl Schema {
    /// The 16-feature mode-switching schema.
    pub fn mode_switching() -> Self {
        let features = vec![
            FeatureSpec::continuous("TT_Drive", "min"),
            FeatureSpec::continuous("TT_Walk", "min"),
            FeatureSpec::continuous("TT_Bike", "min"),
            FeatureSpec::continuous(TT_MOD, "min"),
            FeatureSpec::ordinal(WAIT_TIME, "min"),
            FeatureSpec::ordinal(TRANSFER, "count"),
            FeatureSpec::ordinal(RIDESHARE, "count"),
            FeatureSpec::ordinal("Income", "level"),
            FeatureSpec::ordinal("Bike_Walkability", "level"),
            FeatureSpec::ordinal("MOD_Access", "level"),
            FeatureSpec::continuous("CarPerCap", "cars/person"),
            FeatureSpec::binary("Female"),
            FeatureSpec::binary("Student"),
            FeatureSpec::binary("Current_Mode_Car"),
            FeatureSpec::binary("Current_Mode_Walk"),
            FeatureSpec::binary("Current_Mode_Bike"),
        ];
        Schema {
            features,
            segment_keys: vec![
                "Current_Mode_Car".into(),
                "Current_Mode_Walk".into(),
                "Current_Mode_Bike".into(),
            ],
        }
    }

    pub fn new(features: Vec<FeatureSpec>) -> Self {
        Schema {
            features,
            segment_keys: Vec::new(),
        }
    }
}

/// Current travel mode, the segmentation used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Car,
    Walk,
    Bike,
    Bus,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Car, Mode::Walk, Mode::Bike, Mode::Bus];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Car => "Car",
            Mode::Walk => "Walk",
            Mode::Bike => "Bike",
            Mode::Bus => "Bus",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "car" => Ok(Mode::Car),
            "walk" => Ok(Mode::Walk),
            "bike" => Ok(Mode::Bike),
            "bus" => Ok(Mode::Bus),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

/// N×p feature matrix with a binary response. Immutable once built; the
/// observed range of every feature is recomputed from the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    specs: Vec<FeatureSpec>,
    values: Vec<f64>,
    response: Vec<u8>,
    segment_keys: Vec<String>,
}

impl Dataset {
    pub fn new(
        specs: Vec<FeatureSpec>,
        rows: Vec<Vec<f64>>,
        response: Vec<u8>,
        segment_keys: Vec<String>,
    ) -> Result<Self> {
        let p = specs.len();
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Schema(format!(
                    "row {} has {} values, expected {p}",
                    i + 1,
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(specs, values, response, segment_keys)
    }

    /// Build from a row-major value buffer.
    pub fn from_flat(
        mut specs: Vec<FeatureSpec>,
        values: Vec<f64>,
        response: Vec<u8>,
        segment_keys: Vec<String>,
    ) -> Result<Self> {
        let p = specs.len();
        if p == 0 {
            return Err(Error::Schema("dataset needs at least one feature".into()));
        }
        if values.len() != response.len() * p {
            return Err(Error::Schema(format!(
                "{} values cannot form {} rows of {p} features",
                values.len(),
                response.len()
            )));
        }
        for key in &segment_keys {
            if !specs.iter().any(|s| &s.name == key) {
                return Err(Error::UnknownFeature(key.clone()));
            }
        }
        for (i, &y) in response.iter().enumerate() {
            if y > 1 {
                return Err(Error::ResponseNotBinary {
                    row: i + 1,
                    value: y as f64,
                });
            }
        }
        for (idx, &x) in values.iter().enumerate() {
            let (i, t) = (idx / p, idx % p);
            let spec = &specs[t];
            let bad = |reason: &str| Error::InvalidValue {
                row: i + 1,
                column: spec.name.clone(),
                value: x,
                reason: reason.to_string(),
            };
            if !x.is_finite() {
                return Err(bad("not finite"));
            }
            match spec.kind {
                FeatureKind::Binary if x != 0.0 && x != 1.0 => return Err(bad("binary feature must be 0 or 1")),
                FeatureKind::DiscreteOrdinal if x.fract() != 0.0 => {
                    return Err(bad("discrete-ordinal feature must be integer"))
                }
                _ => {}
            }
        }
        let n = response.len();
        for (t, spec) in specs.iter_mut().enumerate() {
            if spec.kind == FeatureKind::Binary {
                spec.observed_min = 0.0;
                spec.observed_max = 1.0;
            } else if n > 0 {
                let (lo, hi) = (0..n)
                    .map(|i| values[i * p + t])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
                spec.observed_min = lo;
                spec.observed_max = hi;
            }
            if spec.observed_min > spec.observed_max {
                return Err(Error::Schema(format!("feature {} has min > max", spec.name)));
            }
        }
        Ok(Dataset {
            specs,
            values,
            response,
            segment_keys,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_features(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    pub fn spec(&self, t: usize) -> &FeatureSpec {
        &self.specs[t]
    }

    pub fn segment_keys(&self) -> &[String] {
        &self.segment_keys
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.specs.len();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.specs.len())
    }

    pub fn value(&self, i: usize, t: usize) -> f64 {
        self.values[i * self.specs.len() + t]
    }

    pub fn column(&self, t: usize) -> Vec<f64> {
        self.rows().map(|r| r[t]).collect()
    }

    pub fn response(&self) -> &[u8] {
        &self.response
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.specs
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    /// Share of rows with response 1.
    pub fn positive_share(&self) -> f64 {
        if self.response.is_empty() {
            return 0.0;
        }
        self.response.iter().map(|&y| y as f64).sum::<f64>() / self.response.len() as f64
    }

    /// Rows at `indices` (in the given order), with ranges recomputed.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let p = self.specs.len();
        let mut values = Vec::with_capacity(indices.len() * p);
        let mut response = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            response.push(self.response[i]);
        }
        Dataset::from_flat(self.specs.clone(), values, response, self.segment_keys.clone())
    }

    fn mode_columns(&self) -> Result<[usize; 3]> {
        if self.segment_keys.len() != 3 {
            return Err(Error::Schema(
                "segment keys must name the Car, Walk and Bike indicators".into(),
            ));
        }
        Ok([
            self.feature_index(&self.segment_keys[0])?,
            self.feature_index(&self.segment_keys[1])?,
            self.feature_index(&self.segment_keys[2])?,
        ])
    }

    /// Current mode of row `i`; all indicators zero means Bus.
    pub fn mode_of(&self, i: usize) -> Result<Mode> {
        let cols = self.mode_columns()?;
        mode_from_indicators(self.row(i), &cols).ok_or(Error::AmbiguousMode { row: i + 1 })
    }

    pub fn modes(&self) -> Result<Vec<Mode>> {
        let cols = self.mode_columns()?;
        (0..self.n_rows())
            .map(|i| mode_from_indicators(self.row(i), &cols).ok_or(Error::AmbiguousMode { row: i + 1 }))
            .collect()
    }

    /// The (feature, value) pairs that select `mode`.
    pub fn mode_condition(&self, mode: Mode) -> Result<Vec<(String, f64)>> {
        self.mode_columns()?;
        let keys = &self.segment_keys;
        Ok(match mode {
            Mode::Bus => keys.iter().map(|k| (k.clone(), 0.0)).collect(),
            m => vec![(keys[m.index()].clone(), 1.0)],
        })
    }
}

fn mode_from_indicators(row: &[f64], cols: &[usize; 3]) -> Option<Mode> {
    let active: Vec<usize> = (0..3).filter(|&k| row[cols[k]] == 1.0).collect();
    match active.as_slice() {
        [] => Some(Mode::Bus),
        [k] => Some(Mode::ALL[*k]),
        _ => None,
    }
}
