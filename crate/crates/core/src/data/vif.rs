use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use super::Dataset;
use crate::error::{Error, Result};

/// R² at or above this is treated as perfect collinearity.
const COLLINEAR_R2: f64 = 1.0 - 1e-12;

/// Variance inflation factor of one feature. Perfectly collinear features
/// carry `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vif {
    pub feature: String,
    #[serde(serialize_with = "finite_or_inf")]
    pub value: f64,
}

fn finite_or_inf<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str("inf")
    }
}

/// `1 / (1 - R²)` for each column regressed (with intercept) on all others.
pub fn vif(data: &Dataset) -> Result<Vec<Vif>> {
    let (n, p) = (data.n_rows(), data.n_features());
    if p < 2 {
        return Err(Error::Config("VIF needs at least two features".into()));
    }
    // Centered columns; the intercept is absorbed by centering.
    let mut centered = DMatrix::<f64>::zeros(n, p);
    for t in 0..p {
        let col = data.column(t);
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|x| (x - mean).powi(2)).sum();
        if n < 2 || ss <= 0.0 || col.iter().all(|&x| x == col[0]) {
            return Err(Error::ConstantColumn(data.spec(t).name.clone()));
        }
        for (i, x) in col.iter().enumerate() {
            centered[(i, t)] = x - mean;
        }
    }

    let mut out = Vec::with_capacity(p);
    for t in 0..p {
        let y: DVector<f64> = centered.column(t).into_owned();
        let others: Vec<usize> = (0..p).filter(|&j| j != t).collect();
        let x = centered.select_columns(&others);
        let svd = x.clone().svd(true, true);
        let tol = 1e-12 * svd.singular_values.max().max(1.0);
        let beta = svd
            .solve(&y, tol)
            .map_err(|e| Error::Training(format!("VIF regression failed: {e}")))?;
        let resid = &y - &x * beta;
        let sst = y.norm_squared();
        let r2 = 1.0 - resid.norm_squared() / sst;
        let value = if r2 >= COLLINEAR_R2 { f64::INFINITY } else { 1.0 / (1.0 - r2) };
        out.push(Vif {
            feature: data.spec(t).name.clone(),
            value,
        });
    }
    Ok(out)
}
