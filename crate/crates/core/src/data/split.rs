use log::warn;
use rand::seq::SliceRandom;

use super::{Dataset, Mode};
use crate::error::{Error, Result};
use crate::rng;

/// Result of a stratified train/test split.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    /// Original row indices of the test rows, ascending.
    pub test_indices: Vec<usize>,
    pub warnings: Vec<String>,
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Hold out `round(stratum_size * test_fraction)` rows (half rounds up)
/// from each current-mode stratum. Both halves keep the original row order.
pub fn stratified_split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let modes = data.modes()?;
    let mut strata: [Vec<usize>; 4] = Default::default();
    for (i, m) in modes.iter().enumerate() {
        strata[m.index()].push(i);
    }

    let mut rng = rng::seeded(seed);
    let mut warnings = Vec::new();
    let mut test_indices = Vec::new();
    for (mode, stratum) in Mode::ALL.iter().zip(strata.iter_mut()) {
        let size = stratum.len();
        if size == 0 {
            warnings.push(format!("stratum {mode} is empty"));
            continue;
        }
        let target = size as f64 * test_fraction;
        let count = round_half_up(target);
        if target < 1.0 {
            warnings.push(format!(
                "stratum {mode} has {size} rows, fewer than 1/test_fraction; it contributes {count} test rows"
            ));
        }
        stratum.shuffle(&mut rng);
        test_indices.extend_from_slice(&stratum[..count.min(size)]);
    }
    if test_indices.is_empty() {
        warnings.push("test set is empty".to_string());
    }
    for w in &warnings {
        warn!("{w}");
    }
    test_indices.sort_unstable();

    let mut is_test = vec![false; data.n_rows()];
    for &i in &test_indices {
        is_test[i] = true;
    }
    let train_indices: Vec<usize> = (0..data.n_rows()).filter(|&i| !is_test[i]).collect();
    Ok(Split {
        train: data.subset(&train_indices)?,
        test: data.subset(&test_indices)?,
        test_indices,
        warnings,
    })
}

/// Randomly partition `0..n_rows` into `k` folds whose sizes differ by at
/// most one; the first `n_rows % k` folds get the extra row. Each fold is
/// returned in ascending order.
pub fn kfold_partition(data: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    kfold_indices(data.n_rows(), k, seed)
}

pub(crate) fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::Config(format!("k = {k} exceeds the {n} available rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for j in 0..k {
        let len = base + usize::from(j < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}
