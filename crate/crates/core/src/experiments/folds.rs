//! Stratified and grouped k-fold assignment.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ExperimentError;

/// Assign each index to one of `k` folds so that every stratum is spread as
/// evenly as possible: per-stratum counts across folds differ by at most one.
///
/// Members of each stratum are shuffled with a seeded RNG and dealt
/// round-robin. The starting fold advances with every stratum so that the
/// remainders do not pile up in the first folds.
pub fn stratified_kfold<K: Ord + Clone + Debug>(strata: &[K], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, ExperimentError> {
    if k < 2 {
        return Err(ExperimentError::InvalidSpec(format!("fold count must be at least 2, got {k}")));
    }
    let mut groups: BTreeMap<&K, Vec<usize>> = BTreeMap::new();
    for (i, key) in strata.iter().enumerate() {
        groups.entry(key).or_default().push(i);
    }
    if let Some((key, members)) = groups.iter().find(|(_, m)| m.len() < k) {
        return Err(ExperimentError::ClassTooSmall { class: format!("{key:?}"), count: members.len(), k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for members in groups.values_mut() {
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            folds[(offset + j) % k].push(i);
        }
        offset = (offset + members.len()) % k;
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Assign whole groups (e.g. speakers) to folds, largest groups first, each
/// to the currently smallest fold. No group spans two folds.
pub fn grouped_kfold<G: Ord + Clone + Debug>(groups: &[G], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, ExperimentError> {
    if k < 2 {
        return Err(ExperimentError::InvalidSpec(format!("fold count must be at least 2, got {k}")));
    }
    let mut by_group: BTreeMap<&G, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by_group.entry(g).or_default().push(i);
    }
    if by_group.len() < k {
        return Err(ExperimentError::InvalidSpec(format!("{} groups cannot fill {k} folds", by_group.len())));
    }
    let mut members: Vec<Vec<usize>> = by_group.into_values().collect();
    members.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    members.sort_by_key(|m| core::cmp::Reverse(m.len()));
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for m in members {
        let target = (0..k).min_by_key(|&f| (folds[f].len(), f)).unwrap_or(0);
        folds[target].extend(m);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Training indices for fold `held_out`: every index not in that fold.
pub fn training_indices(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut train: Vec<usize> = folds.iter().enumerate().filter(|&(f, _)| f != held_out).flat_map(|(_, idx)| idx.iter().copied()).collect();
    train.sort_unstable();
    train
}
