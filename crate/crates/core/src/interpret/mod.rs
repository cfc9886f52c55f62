//! Partial dependence, individual conditional expectation and their
//! conditional and centered variants, plus perturbation effects.

mod effects;

use std::fmt::Write as _;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind, Mode};
use crate::error::{Error, Result};
use crate::models::Classifier;
use crate::rng::seeded;

pub use effects::{
    effects_suite, elasticity, in_range_filter, marginal_effect, EffectKind, EffectRow, EffectsTable, Perturbation,
};

pub const DEFAULT_GRID_POINTS: usize = 50;
pub const DEFAULT_CURVE_CAP: usize = 100;

/// Evaluation points for one feature, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub feature: String,
    pub values: Vec<f64>,
}

impl Grid {
    /// Equally spaced points over the observed range for continuous
    /// features; the observed unique values otherwise.
    pub fn for_feature(data: &Dataset, feature: &str, points: usize) -> Result<Self> {
        let t = data.feature_index(feature)?;
        let spec = data.spec(t);
        if data.n_rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        let values = match spec.kind {
            FeatureKind::Continuous => {
                if points == 0 {
                    return Err(Error::Config("grid needs at least one point".into()));
                }
                let (lo, hi) = (spec.observed_min, spec.observed_max);
                if lo == hi || points == 1 {
                    vec![lo]
                } else {
                    let step = (hi - lo) / (points - 1) as f64;
                    (0..points)
                        .map(|j| if j == points - 1 { hi } else { lo + step * j as f64 })
                        .collect()
                }
            }
            FeatureKind::DiscreteOrdinal | FeatureKind::Binary => {
                let mut v = data.column(t);
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
        };
        Ok(Grid {
            feature: feature.to_string(),
            values,
        })
    }

    /// A caller-chosen grid; values must be ascending and inside the
    /// feature's observed range.
    pub fn custom(data: &Dataset, feature: &str, values: Vec<f64>) -> Result<Self> {
        let spec = data.spec(data.feature_index(feature)?);
        if values.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("grid values must be strictly ascending".into()));
        }
        if let Some(v) = values.iter().find(|&&v| !spec.contains(v)) {
            return Err(Error::Config(format!(
                "grid value {v} outside the observed range of {feature}"
            )));
        }
        Ok(Grid {
            feature: feature.to_string(),
            values,
        })
    }
}

/// Instances whose listed features equal the listed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub pairs: Vec<(String, f64)>,
}

impl Condition {
    pub fn new(pairs: Vec<(String, f64)>) -> Self {
        Condition { pairs }
    }

    pub fn single(feature: &str, value: f64) -> Self {
        Condition {
            pairs: vec![(feature.to_string(), value)],
        }
    }

    /// The rows currently using `mode`.
    pub fn mode(data: &Dataset, mode: Mode) -> Result<Self> {
        Ok(Condition {
            pairs: data.mode_condition(mode)?,
        })
    }

    pub fn select(&self, data: &Dataset) -> Result<Vec<usize>> {
        let cols: Vec<(usize, f64)> = self
            .pairs
            .iter()
            .map(|(f, v)| Ok((data.feature_index(f)?, *v)))
            .collect::<Result<_>>()?;
        Ok((0..data.n_rows())
            .filter(|&i| cols.iter().all(|&(t, v)| data.value(i, t) == v))
            .collect())
    }

    pub fn label(&self) -> String {
        self.pairs
            .iter()
            .map(|(f, v)| format!("{f}={v}"))
            .collect::<Vec<_>>()
            .join("&")
    }
}

/// Rows selected by an optional condition (all rows when `None`).
pub fn select_rows(data: &Dataset, condition: Option<&Condition>) -> Result<Vec<usize>> {
    match condition {
        Some(c) => c.select(data),
        None => Ok((0..data.n_rows()).collect()),
    }
}

/// One curve per selected instance over a feature grid, and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub grid: Grid,
    pub condition: Option<Condition>,
    pub instance_ids: Vec<usize>,
    pub curves: Vec<Vec<f64>>,
    pub average: Vec<f64>,
    /// Anchor grid index when centered.
    pub centered: Option<usize>,
}

/// Pointwise mean of the curves, summed in instance order.
fn mean_curve(curves: &[Vec<f64>], len: usize) -> Vec<f64> {
    let n = curves.len() as f64;
    (0..len)
        .map(|j| {
            let mut s = 0.0;
            for c in curves {
                s += c[j];
            }
            s / n
        })
        .collect()
}

/// Prediction for each grid value with feature `t` of `row` replaced.
pub fn curve_for_row<M: Classifier + ?Sized>(model: &M, row: &[f64], t: usize, grid: &[f64]) -> Vec<f64> {
    let mut x = row.to_vec();
    grid.iter()
        .map(|&s| {
            x[t] = s;
            model.proba(&x)
        })
        .collect()
}

/// ICE curves for the instances passing `condition`; with a condition the
/// curves are the conditional individual curves and the average is the
/// conditional PDP.
pub fn ice<M: Classifier + ?Sized>(
    model: &M,
    data: &Dataset,
    grid: &Grid,
    condition: Option<&Condition>,
) -> Result<CurveFamily> {
    if data.n_features() != model.n_features() {
        return Err(Error::LengthMismatch {
            expected: model.n_features(),
            got: data.n_features(),
        });
    }
    let t = data.feature_index(&grid.feature)?;
    let ids = select_rows(data, condition)?;
    if ids.is_empty() {
        return Err(Error::EmptySelection);
    }
    let curves: Vec<Vec<f64>> = ids
        .par_iter()
        .map(|&i| curve_for_row(model, data.row(i), t, &grid.values))
        .collect();
    let average = mean_curve(&curves, grid.values.len());
    Ok(CurveFamily {
        grid: grid.clone(),
        condition: condition.cloned(),
        instance_ids: ids,
        curves,
        average,
        centered: None,
    })
}

/// Unconditional PDP (the family still carries its ICE curves).
pub fn pdp<M: Classifier + ?Sized>(model: &M, data: &Dataset, grid: &Grid) -> Result<CurveFamily> {
    ice(model, data, grid, None)
}

/// PDP over the subpopulation passing `condition`.
pub fn cpdp<M: Classifier + ?Sized>(model: &M, data: &Dataset, grid: &Grid, condition: &Condition) -> Result<CurveFamily> {
    ice(model, data, grid, Some(condition))
}

/// Individual curves of the subpopulation passing `condition`.
pub fn cipdp<M: Classifier + ?Sized>(model: &M, data: &Dataset, grid: &Grid, condition: &Condition) -> Result<CurveFamily> {
    ice(model, data, grid, Some(condition))
}

/// Subtract each curve's value at `anchor`; the average is recomputed from
/// the centered curves.
pub fn center_curves(family: &CurveFamily, anchor: usize) -> Result<CurveFamily> {
    let len = family.grid.values.len();
    if anchor >= len {
        return Err(Error::Config(format!("anchor {anchor} outside a grid of {len} points")));
    }
    let curves: Vec<Vec<f64>> = family
        .curves
        .iter()
        .map(|c| {
            let a = c[anchor];
            c.iter().map(|v| v - a).collect()
        })
        .collect();
    let average = mean_curve(&curves, len);
    Ok(CurveFamily {
        curves,
        average,
        centered: Some(anchor),
        ..family.clone()
    })
}

/// Slope of the average curve between the grid endpoints.
pub fn global_slope(family: &CurveFamily) -> Result<f64> {
    if family.centered.is_some() {
        return Err(Error::Config("global slope needs an uncentered family".into()));
    }
    let g = &family.grid.values;
    if g.len() < 2 {
        return Err(Error::Config("global slope needs at least two grid points".into()));
    }
    let width = g[g.len() - 1] - g[0];
    if width == 0.0 {
        return Err(Error::Config("grid has zero width".into()));
    }
    Ok((family.average[g.len() - 1] - family.average[0]) / width)
}

impl CurveFamily {
    /// A copy keeping at most `cap` curves, drawn without replacement from
    /// `seed` and kept in instance order. The average is untouched.
    pub fn sample_curves(&self, cap: usize, seed: u64) -> CurveFamily {
        let n = self.curves.len();
        if n <= cap {
            return self.clone();
        }
        let mut keep = index::sample(&mut seeded(seed), n, cap).into_vec();
        keep.sort_unstable();
        CurveFamily {
            instance_ids: keep.iter().map(|&k| self.instance_ids[k]).collect(),
            curves: keep.iter().map(|&k| self.curves[k].clone()).collect(),
            ..self.clone()
        }
    }

    /// Long CSV: grid_value, instance_id (or AVG), probability.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("grid_value,instance_id,probability\n");
        for (id, c) in self.instance_ids.iter().zip(&self.curves) {
            for (x, v) in self.grid.values.iter().zip(c) {
                writeln!(s, "{x},{id},{v:.4}").unwrap();
            }
        }
        for (x, v) in self.grid.values.iter().zip(&self.average) {
            writeln!(s, "{x},AVG,{v:.4}").unwrap();
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSpec, Schema};
    use proptest::prelude::*;

    struct Constant(f64, usize);
    impl Classifier for Constant {
        fn n_features(&self) -> usize {
            self.1
        }
        fn proba(&self, _: &[f64]) -> f64 {
            self.0
        }
    }

    struct Stump;
    impl Classifier for Stump {
        fn n_features(&self) -> usize {
            2
        }
        fn proba(&self, x: &[f64]) -> f64 {
            if x[0] > 5.0 {
                0.8
            } else {
                0.2
            }
        }
    }

    /// logistic(0.3 (x0 + x1) - 2)
    struct Additive;
    impl Classifier for Additive {
        fn n_features(&self) -> usize {
            2
        }
        fn proba(&self, x: &[f64]) -> f64 {
            1.0 / (1.0 + (-(0.3 * (x[0] + x[1]) - 2.0)).exp())
        }
    }

    fn two_col(rows: Vec<Vec<f64>>) -> Dataset {
        let n = rows.len();
        Dataset::new(
            vec![FeatureSpec::continuous("x0", ""), FeatureSpec::continuous("x1", "")],
            rows,
            (0..n).map(|i| (i % 2) as u8).collect(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn continuous_grid_spans_range() {
        let d = two_col(vec![vec![1.0, 0.0], vec![4.0, 0.0], vec![2.0, 1.0]]);
        let g = Grid::for_feature(&d, "x0", 50).unwrap();
        assert_eq!(g.values.len(), 50);
        assert_eq!(g.values[0], 1.0);
        assert_eq!(g.values[49], 4.0);
        assert!(g.values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn discrete_grid_enumerates_observed_values() {
        let s = Schema::mode_switching();
        let p = s.features.len();
        let rows: Vec<Vec<f64>> = [0.0, 2.0, 2.0, 1.0]
            .iter()
            .map(|&v| {
                let mut r = vec![1.0; p];
                r[5] = v;
                r[p - 1] = 0.0;
                r[p - 2] = 0.0;
                r
            })
            .collect();
        let d = Dataset::new(s.features, rows, vec![0, 1, 0, 1], s.segment_keys).unwrap();
        assert_eq!(Grid::for_feature(&d, "Transfer", 50).unwrap().values, vec![0.0, 1.0, 2.0]);
        assert!(Grid::custom(&d, "Transfer", vec![0.0, 3.0]).is_err());
    }

    #[test]
    fn constant_model_gives_flat_curves() {
        let d = two_col(vec![vec![1.0, 0.0], vec![4.0, 3.0], vec![2.0, 1.0]]);
        let g = Grid::for_feature(&d, "x0", 7).unwrap();
        let f = ice(&Constant(0.4, 2), &d, &g, None).unwrap();
        assert!(f.curves.iter().flatten().all(|&v| v == 0.4));
        assert!(f.average.iter().all(|&v| (v - 0.4).abs() < 1e-15));
        assert_eq!(global_slope(&f).unwrap(), 0.0);
    }

    #[test]
    fn stump_forces_every_curve() {
        let d = two_col(vec![vec![0.0, 9.0], vec![10.0, -3.0], vec![4.0, 1.0]]);
        let g = Grid::custom(&d, "x0", vec![0.0, 10.0]).unwrap();
        let f = ice(&Stump, &d, &g, None).unwrap();
        for c in &f.curves {
            assert_eq!(c, &vec![0.2, 0.8]);
        }
    }

    #[test]
    fn additive_model_matches_direct_evaluation() {
        let d = two_col(vec![vec![1.0, 2.0], vec![3.0, -1.0], vec![5.0, 0.5]]);
        let g = Grid::custom(&d, "x0", vec![1.0, 2.0, 5.0]).unwrap();
        let f = ice(&Additive, &d, &g, None).unwrap();
        for (i, c) in f.curves.iter().enumerate() {
            for (j, &s) in g.values.iter().enumerate() {
                assert_eq!(c[j], Additive.proba(&[s, d.value(i, 1)]));
            }
        }
    }

    #[test]
    fn two_instance_stump_pdp_by_hand() {
        let d = two_col(vec![vec![1.0, 0.0], vec![6.0, 1.0]]);
        let g = Grid::custom(&d, "x0", vec![1.0, 6.0]).unwrap();
        let f = pdp(&Stump, &d, &g).unwrap();
        assert_eq!(f.average, vec![0.2, 0.8]);
        assert!((global_slope(&f).unwrap() - 0.12).abs() < 1e-15);
    }

    #[test]
    fn empty_condition_is_an_error() {
        let d = two_col(vec![vec![1.0, 0.0], vec![6.0, 1.0]]);
        let g = Grid::custom(&d, "x0", vec![1.0]).unwrap();
        let c = Condition::single("x1", 7.0);
        assert!(matches!(cpdp(&Stump, &d, &g, &c), Err(Error::EmptySelection)));
    }

    #[test]
    fn single_instance_condition_reproduces_its_curve() {
        let d = two_col(vec![vec![1.0, 0.0], vec![3.0, 1.0], vec![5.0, 2.0]]);
        let g = Grid::for_feature(&d, "x0", 5).unwrap();
        let all = ice(&Additive, &d, &g, None).unwrap();
        let one = cipdp(&Additive, &d, &g, &Condition::single("x1", 1.0)).unwrap();
        assert_eq!(one.instance_ids, vec![1]);
        assert_eq!(one.curves[0], all.curves[1]);
        assert_eq!(one.average, all.curves[1]);
    }

    #[test]
    fn centering_properties() {
        let d = two_col(vec![vec![1.0, 0.0], vec![3.0, 1.0], vec![5.0, 2.0]]);
        let g = Grid::for_feature(&d, "x0", 6).unwrap();
        let f = ice(&Additive, &d, &g, None).unwrap();
        let c = center_curves(&f, 0).unwrap();
        assert!(c.curves.iter().all(|v| v[0] == 0.0));
        assert_eq!(c.average[0], 0.0);
        assert_eq!(center_curves(&c, 0).unwrap(), c);
        for j in 0..6 {
            assert!((c.average[j] - (f.average[j] - f.average[0])).abs() < 1e-15);
        }
        assert!(center_curves(&f, 6).is_err());
        assert!(global_slope(&c).is_err());
    }

    #[test]
    fn linear_curve_slope() {
        let d = two_col(vec![vec![0.0, 0.0], vec![4.0, 1.0]]);
        let g = Grid::custom(&d, "x0", vec![0.0, 1.0, 2.5, 4.0]).unwrap();
        let f = CurveFamily {
            grid: g.clone(),
            condition: None,
            instance_ids: vec![0],
            curves: vec![vec![0.1, 0.15, 0.225, 0.3]],
            average: vec![0.1, 0.15, 0.225, 0.3],
            centered: None,
        };
        assert!((global_slope(&f).unwrap() - 0.05).abs() < 1e-15);
        let f2 = CurveFamily {
            grid: Grid::custom(&d, "x0", vec![0.0, 2.0]).unwrap(),
            average: vec![0.8, 0.65],
            curves: vec![vec![0.8, 0.65]],
            ..f
        };
        assert!((global_slope(&f2).unwrap() + 0.075).abs() < 1e-15);
    }

    #[test]
    fn sampling_keeps_average_and_caps_curves() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let d = two_col(rows);
        let g = Grid::for_feature(&d, "x0", 4).unwrap();
        let f = ice(&Additive, &d, &g, None).unwrap();
        let s = f.sample_curves(10, 3);
        assert_eq!(s.curves.len(), 10);
        assert_eq!(s.average, f.average);
        assert_eq!(s, f.sample_curves(10, 3));
        let csv = s.to_csv();
        assert_eq!(csv.lines().filter(|l| l.contains(",AVG,")).count(), 4);
        assert_eq!(csv.lines().count(), 1 + 10 * 4 + 4);
    }

    proptest! {
        #[test]
        fn average_is_mean_of_curves(xs in proptest::collection::vec((0.0f64..10.0, 0.0f64..5.0), 1..15)) {
            let d = two_col(xs.iter().map(|&(a, b)| vec![a, b]).collect());
            let g = Grid::for_feature(&d, "x0", 5).unwrap();
            let f = ice(&Additive, &d, &g, None).unwrap();
            for j in 0..g.values.len() {
                let mut s = 0.0;
                for c in &f.curves {
                    s += c[j];
                }
                prop_assert_eq!(f.average[j], s / f.curves.len() as f64);
            }
        }
    }
}
