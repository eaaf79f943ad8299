//! Rates, folds and labelling tools.

mod kpi;
mod labels;

pub use kpi::{compute_kpis, FramePrediction, KpiConfig, KpiCounts, KpiReport, LatencySummary};
pub use labels::{aggregate_labels, interpolate_labels, Annotation, Consensus, DenseLabel, Interpolation, Keyframe};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seeded split of `n` items into `k` disjoint folds whose sizes differ by
/// at most one.
pub fn fold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::Invalid(format!("{k} folds for {n} items")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, v) in idx.into_iter().enumerate() {
        folds[i % k].push(v);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}
