//! Marginal effects and arc elasticities of aggregate switching share.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{select_rows, Condition};
use crate::data::{Dataset, FeatureKind, Mode, RIDESHARE, TRANSFER, TT_MOD, WAIT_TIME};
use crate::error::{Error, Result};
use crate::models::Classifier;

/// How a feature value is perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "delta", rename_all = "lowercase")]
pub enum Perturbation {
    /// x + delta
    Unit(f64),
    /// x (1 + delta)
    Fraction(f64),
}

impl Perturbation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Perturbation::Unit(d) => x + d,
            Perturbation::Fraction(d) => x * (1.0 + d),
        }
    }

    pub fn delta(self) -> f64 {
        match self {
            Perturbation::Unit(d) | Perturbation::Fraction(d) => d,
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Perturbation::Unit(d) => write!(f, "{d:+}"),
            Perturbation::Fraction(d) => write!(f, "{:+}%", d * 100.0),
        }
    }
}

/// Rows among `candidates` whose perturbed value of feature `t` stays inside
/// the feature's observed range.
pub fn in_range_among(data: &Dataset, t: usize, pert: Perturbation, candidates: &[usize]) -> Vec<usize> {
    let spec = data.spec(t);
    candidates
        .iter()
        .copied()
        .filter(|&i| spec.contains(pert.apply(data.value(i, t))))
        .collect()
}

/// All rows whose perturbed value of feature `t` stays in range.
pub fn in_range_filter(data: &Dataset, feature: &str, pert: Perturbation) -> Result<Vec<usize>> {
    if pert.delta() == 0.0 {
        return Err(Error::Config("perturbation delta must be nonzero".into()));
    }
    let t = data.feature_index(feature)?;
    let all: Vec<usize> = (0..data.n_rows()).collect();
    Ok(in_range_among(data, t, pert, &all))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    Marginal,
    Elasticity,
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectKind::Marginal => "marginal",
            EffectKind::Elasticity => "elasticity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRow {
    pub feature: String,
    pub perturbation: Perturbation,
    /// "All" or a mode name.
    pub segment: String,
    pub kind: EffectKind,
    /// Raw fraction; `None` when no instance was retained (or, for an
    /// elasticity, when the base share is zero).
    pub value: Option<f64>,
    pub n_in_range: usize,
    /// Mean predicted share before and after the perturbation.
    pub q_original: Option<f64>,
    pub q_perturbed: Option<f64>,
}

/// Mean class-1 probability over `rows`, with feature `t` optionally
/// perturbed, summed in row order.
fn share<M: Classifier + ?Sized>(model: &M, data: &Dataset, rows: &[usize], t: usize, pert: Option<Perturbation>) -> f64 {
    let probs: Vec<f64> = rows
        .par_iter()
        .map(|&i| {
            let mut x = data.row(i).to_vec();
            if let Some(p) = pert {
                x[t] = p.apply(x[t]);
            }
            model.proba(&x)
        })
        .collect();
    let mut s = 0.0;
    for p in &probs {
        s += p;
    }
    s / probs.len() as f64
}

fn segment_label(condition: Option<&Condition>, segment: Option<&str>) -> String {
    match (segment, condition) {
        (Some(s), _) => s.to_string(),
        (None, Some(c)) => c.label(),
        (None, None) => "All".to_string(),
    }
}

fn effect<M: Classifier + ?Sized>(
    model: &M,
    data: &Dataset,
    feature: &str,
    pert: Perturbation,
    condition: Option<&Condition>,
    kind: EffectKind,
) -> Result<EffectRow> {
    if model.n_features() != data.n_features() {
        return Err(Error::LengthMismatch {
            expected: model.n_features(),
            got: data.n_features(),
        });
    }
    if pert.delta() == 0.0 || !pert.delta().is_finite() {
        return Err(Error::Config("perturbation delta must be finite and nonzero".into()));
    }
    let t = data.feature_index(feature)?;
    let selected = select_rows(data, condition)?;
    let rows = in_range_among(data, t, pert, &selected);
    let mut row = EffectRow {
        feature: feature.to_string(),
        perturbation: pert,
        segment: segment_label(condition, None),
        kind,
        value: None,
        n_in_range: rows.len(),
        q_original: None,
        q_perturbed: None,
    };
    if rows.is_empty() {
        return Ok(row);
    }
    let q0 = share(model, data, &rows, t, None);
    let q1 = share(model, data, &rows, t, Some(pert));
    let d = pert.delta().abs();
    row.q_original = Some(q0);
    row.q_perturbed = Some(q1);
    row.value = match kind {
        EffectKind::Marginal => Some((q1 - q0) / d),
        EffectKind::Elasticity => (q0 > 0.0).then(|| ((q1 - q0) / q0) / d),
    };
    Ok(row)
}

/// Change in mean switching probability per unit change of `feature`,
/// over the instances passing `condition` whose perturbed value stays in
/// range.
pub fn marginal_effect<M: Classifier + ?Sized>(
    model: &M,
    data: &Dataset,
    feature: &str,
    delta: f64,
    condition: Option<&Condition>,
) -> Result<EffectRow> {
    effect(model, data, feature, Perturbation::Unit(delta), condition, EffectKind::Marginal)
}

/// Relative change in mean switching probability per relative change
/// `delta` of a continuous feature.
pub fn elasticity<M: Classifier + ?Sized>(
    model: &M,
    data: &Dataset,
    feature: &str,
    delta: f64,
    condition: Option<&Condition>,
) -> Result<EffectRow> {
    let t = data.feature_index(feature)?;
    if data.spec(t).kind != FeatureKind::Continuous {
        return Err(Error::Config(format!(
            "elasticity is defined only for continuous features; {feature} is not"
        )));
    }
    effect(model, data, feature, Perturbation::Fraction(delta), condition, EffectKind::Elasticity)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectsTable {
    pub rows: Vec<EffectRow>,
}

/// The level-of-service perturbations reported by `effects_suite`, in
/// output order.
pub fn suite_perturbations() -> Vec<(&'static str, EffectKind, Perturbation)> {
    use EffectKind::*;
    use Perturbation::*;
    vec![
        (WAIT_TIME, Marginal, Unit(1.0)),
        (WAIT_TIME, Marginal, Unit(-2.0)),
        (TRANSFER, Marginal, Unit(1.0)),
        (TRANSFER, Marginal, Unit(-1.0)),
        (RIDESHARE, Marginal, Unit(1.0)),
        (RIDESHARE, Marginal, Unit(-1.0)),
        (TT_MOD, Marginal, Unit(1.0)),
        (TT_MOD, Marginal, Unit(-1.0)),
        (TT_MOD, Elasticity, Fraction(0.1)),
        (TT_MOD, Elasticity, Fraction(-0.1)),
    ]
}

/// Every level-of-service perturbation for all rows and for each current
/// mode.
pub fn effects_suite<M: Classifier + ?Sized>(model: &M, data: &Dataset) -> Result<EffectsTable> {
    let mut segments: Vec<(String, Option<Condition>)> = vec![("All".into(), None)];
    for mode in Mode::ALL {
        segments.push((mode.to_string(), Some(Condition::mode(data, mode)?)));
    }
    let mut rows = Vec::new();
    for (feature, kind, pert) in suite_perturbations() {
        for (label, cond) in &segments {
            let mut r = match kind {
                EffectKind::Marginal => marginal_effect(model, data, feature, pert.delta(), cond.as_ref())?,
                EffectKind::Elasticity => elasticity(model, data, feature, pert.delta(), cond.as_ref())?,
            };
            r.segment = label.clone();
            rows.push(r);
        }
    }
    Ok(EffectsTable { rows })
}

impl EffectsTable {
    /// Marginal effects as percentages and elasticities as ratios, both to
    /// two decimals; absent values are empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("feature,delta,segment,kind,value,n_in_range\n");
        for r in &self.rows {
            let value = match (r.value, r.kind) {
                (None, _) => String::new(),
                (Some(v), EffectKind::Marginal) => format!("{:.2}%", v * 100.0),
                (Some(v), EffectKind::Elasticity) => format!("{v:.2}"),
            };
            writeln!(
                s,
                "{},{},{},{},{},{}",
                r.feature, r.perturbation, r.segment, r.kind, value, r.n_in_range
            )
            .unwrap();
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn find(&self, feature: &str, delta: f64, segment: &str, kind: EffectKind) -> Option<&EffectRow> {
        self.rows
            .iter()
            .find(|r| r.feature == feature && r.perturbation.delta() == delta && r.segment == segment && r.kind == kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSpec, Schema};
    use proptest::prelude::*;

    struct WaitStump;
    impl Classifier for WaitStump {
        fn n_features(&self) -> usize {
            1
        }
        fn proba(&self, x: &[f64]) -> f64 {
            if x[0] < 4.0 {
                0.8
            } else {
                0.6
            }
        }
    }

    fn wait_data(values: &[f64]) -> Dataset {
        Dataset::new(
            vec![FeatureSpec::ordinal("Wait_Time", "minutes")],
            values.iter().map(|&v| vec![v]).collect(),
            values.iter().map(|_| 0).collect(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn stump_marginal_by_hand() {
        // 8 + 1 leaves the range; 3 and 5 stay
        let d = wait_data(&[3.0, 5.0, 8.0]);
        let r = marginal_effect(&WaitStump, &d, "Wait_Time", 1.0, None).unwrap();
        assert_eq!(r.n_in_range, 2);
        assert!((r.q_original.unwrap() - 0.7).abs() < 1e-15);
        assert!((r.q_perturbed.unwrap() - 0.6).abs() < 1e-15);
        assert!((r.value.unwrap() + 0.10).abs() < 1e-12);
    }

    struct Const(f64, usize);
    impl Classifier for Const {
        fn n_features(&self) -> usize {
            self.1
        }
        fn proba(&self, _: &[f64]) -> f64 {
            self.0
        }
    }

    #[test]
    fn constant_model_has_zero_effects() {
        let d = Dataset::new(
            vec![FeatureSpec::continuous("TT_MOD", "minutes")],
            vec![vec![5.0], vec![10.0], vec![20.0]],
            vec![0, 1, 0],
            vec![],
        )
        .unwrap();
        assert_eq!(marginal_effect(&Const(0.3, 1), &d, "TT_MOD", 1.0, None).unwrap().value, Some(0.0));
        assert_eq!(elasticity(&Const(0.3, 1), &d, "TT_MOD", 0.1, None).unwrap().value, Some(0.0));
        assert_eq!(elasticity(&Const(0.0, 1), &d, "TT_MOD", 0.1, None).unwrap().value, None);
    }

    /// 0.35 below x = 11, 0.30 from there on.
    struct Drop;
    impl Classifier for Drop {
        fn n_features(&self) -> usize {
            1
        }
        fn proba(&self, x: &[f64]) -> f64 {
            if x[0] < 11.0 {
                0.35
            } else {
                0.30
            }
        }
    }

    #[test]
    fn elasticity_arithmetic() {
        let d = Dataset::new(
            vec![FeatureSpec::continuous("TT_MOD", "minutes")],
            vec![vec![10.0], vec![10.0], vec![20.0]],
            vec![0, 1, 0],
            vec![],
        )
        .unwrap();
        let r = elasticity(&Drop, &d, "TT_MOD", 0.1, None).unwrap();
        assert_eq!(r.n_in_range, 2);
        assert!((r.value.unwrap() + 1.4285714285714).abs() < 1e-9);
    }

    #[test]
    fn elasticity_rejects_discrete_feature() {
        let d = wait_data(&[3.0, 5.0]);
        assert!(matches!(elasticity(&WaitStump, &d, "Wait_Time", 0.1, None), Err(Error::Config(_))));
        assert!(marginal_effect(&WaitStump, &d, "Wait_Time", 0.0, None).is_err());
    }

    #[test]
    fn empty_retention_gives_absent_value() {
        let d = wait_data(&[3.0, 3.0]);
        let r = marginal_effect(&WaitStump, &d, "Wait_Time", 1.0, None).unwrap();
        assert_eq!((r.n_in_range, r.value), (0, None));
    }

    #[test]
    fn transfer_filter_rule() {
        let d = Dataset::new(
            vec![FeatureSpec::ordinal("Transfer", "count")],
            [0.0, 1.0, 2.0, 1.0, 0.0, 2.0].iter().map(|&v| vec![v]).collect(),
            vec![0; 6],
            vec![],
        )
        .unwrap();
        assert_eq!(in_range_filter(&d, "Transfer", Perturbation::Unit(1.0)).unwrap(), vec![0, 1, 3, 4]);
        assert_eq!(in_range_filter(&d, "Transfer", Perturbation::Unit(-1.0)).unwrap(), vec![1, 2, 3, 5]);
        assert_eq!(in_range_filter(&d, "Transfer", Perturbation::Unit(1e-9)).unwrap().len(), 4);
    }

    #[test]
    fn suite_shape_and_replay() {
        let s = Schema::mode_switching();
        let p = s.features.len();
        let mut rows = Vec::new();
        for i in 0..12 {
            let mut r: Vec<f64> = (0..p).map(|t| ((i + t) % 3) as f64).collect();
            for t in 11..p {
                r[t] = 0.0;
            }
            if i % 4 < 3 {
                r[p - 3 + i % 4] = 1.0;
            }
            r[11] = (i % 2) as f64;
            rows.push(r);
        }
        let d = Dataset::new(s.features, rows, (0..12).map(|i| (i % 2) as u8).collect(), s.segment_keys).unwrap();
        struct Lin(usize);
        impl Classifier for Lin {
            fn n_features(&self) -> usize {
                self.0
            }
            fn proba(&self, x: &[f64]) -> f64 {
                (0.6 - 0.05 * x[3] - 0.04 * x[4] - 0.03 * x[5] - 0.02 * x[6]).clamp(0.0, 1.0)
            }
        }
        let m = Lin(p);
        let table = effects_suite(&m, &d).unwrap();
        assert_eq!(table.rows.len(), 50);
        for r in &table.rows {
            let cond = match r.segment.as_str() {
                "All" => None,
                s => Some(Condition::mode(&d, s.parse().unwrap()).unwrap()),
            };
            let again = match r.kind {
                EffectKind::Marginal => marginal_effect(&m, &d, &r.feature, r.perturbation.delta(), cond.as_ref()),
                EffectKind::Elasticity => elasticity(&m, &d, &r.feature, r.perturbation.delta(), cond.as_ref()),
            }
            .unwrap();
            assert_eq!(again.value, r.value);
            assert_eq!(again.n_in_range, r.n_in_range);
        }
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 51);
        assert!(csv.contains("TT_MOD,+10%,All,elasticity,"));
    }

    proptest! {
        #[test]
        fn filter_is_monotone_in_delta(vals in proptest::collection::vec(0u8..3, 2..30), d in 0.01f64..2.0, shrink in 0.0f64..1.0) {
            let data = Dataset::new(
                vec![FeatureSpec::continuous("x", "")],
                vals.iter().map(|&v| vec![v as f64]).collect(),
                vec![0; vals.len()],
                vec![],
            ).unwrap();
            let big = in_range_filter(&data, "x", Perturbation::Unit(d)).unwrap();
            let small = in_range_filter(&data, "x", Perturbation::Unit(d * shrink.max(1e-6))).unwrap();
            prop_assert!(big.iter().all(|i| small.contains(i)));
        }
    }
}
