//! Stratified k-fold splits and random oversampling.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::MlError;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Splits positions `0..y.len()` into `k` folds with class proportions kept:
/// each class is shuffled and dealt round robin. Fails when a class has
/// fewer than `k` members.
pub fn stratified_kfold(y: &[bool], k: usize, seed: u64) -> Result<Vec<Fold>, MlError> {
    if k < 2 {
        return Err(MlError::Input(format!("k-folds must be >= 2 (got {k})")));
    }
    let mut rng = rng::seeded(seed);
    let mut buckets = vec![Vec::new(); k];
    let mut dealt = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.len() < k {
            return Err(MlError::Input(format!(
                "k-folds = {k} exceeds the {} members of class {}",
                members.len(),
                u8::from(class)
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            buckets[dealt % k].push(i);
            dealt += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let mut validation = buckets[f].clone();
            validation.sort_unstable();
            let mut train: Vec<usize> = (0..k).filter(|&g| g != f).flat_map(|g| buckets[g].iter().copied()).collect();
            train.sort_unstable();
            Fold { train, validation }
        })
        .collect())
}

/// Duplicates randomly chosen minority rows of `rows` until both classes
/// have the same count. Returns the original rows followed by the copies.
pub fn oversample_random(rows: &[usize], y: &[bool], seed: u64) -> Vec<usize> {
    let pos: Vec<usize> = rows.iter().copied().filter(|&i| y[i]).collect();
    let neg: Vec<usize> = rows.iter().copied().filter(|&i| !y[i]).collect();
    let gap = pos.len().abs_diff(neg.len());
    let minority = if pos.len() < neg.len() { pos } else { neg };
    let mut out = rows.to_vec();
    if minority.is_empty() {
        return out;
    }
    let mut rng = rng::seeded(seed);
    out.extend((0..gap).map(|_| minority[rng.gen_range(0..minority.len())]));
    out
}
