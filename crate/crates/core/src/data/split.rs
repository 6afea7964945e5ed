use rand::seq::SliceRandom;

use super::DataError;
use crate::dataset::SurvivalDataset;
use crate::rng;

/// Row indices of the training and validation partitions, each ascending.
/// The training partition holds `round(fraction · n)` subjects.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::InvalidFraction(fraction));
    }
    let n_train = (fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(DataError::EmptyPartition { n, fraction });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let mut val = order.split_off(n_train);
    order.sort_unstable();
    val.sort_unstable();
    Ok((order, val))
}

/// Seeded shuffle-then-partition; both partitions keep the original row
/// order.
pub fn split(
    data: &SurvivalDataset,
    fraction: f64,
    seed: u64,
) -> Result<(SurvivalDataset, SurvivalDataset), DataError> {
    let (train, val) = split_indices(data.n_subjects(), fraction, seed)?;
    Ok((data.select_rows(&train)?, data.select_rows(&val)?))
}
