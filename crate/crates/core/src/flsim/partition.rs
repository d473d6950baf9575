use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionScheme {
    /// Shuffle everything and split into equal parts.
    Homogeneous,
    /// Every client gets a slice of every class; per class, one client gets
    /// half the usual share and the next gets one and a half times it.
    Mild,
    /// Every client holds data from exactly two classes.
    Extreme,
}

impl PartitionScheme {
    pub fn name(self) -> &'static str {
        match self {
            PartitionScheme::Homogeneous => "homogeneous",
            PartitionScheme::Mild => "mild",
            PartitionScheme::Extreme => "extreme",
        }
    }
}

impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(PartitionScheme::Homogeneous),
            "mild" => Ok(PartitionScheme::Mild),
            "extreme" => Ok(PartitionScheme::Extreme),
            other => Err(Error::InvalidParameter(format!(
                "unknown partition scheme `{other}` (valid: homogeneous, mild, extreme)"
            ))),
        }
    }
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Split `0..labels.len()` into `n` disjoint client index lists.
///
/// For `Extreme`, each class is cut into `2n / class_count` contiguous
/// chunks (so `2n` must be a multiple of the class count) and the chunks are
/// dealt out in random pairs whose labels differ.
pub fn partition_data(
    labels: &[usize],
    class_count: usize,
    scheme: PartitionScheme,
    n: usize,
    seed_value: u64,
) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "cannot partition among zero clients".into(),
        ));
    }
    if let Some(l) = labels.iter().find(|&&l| l >= class_count) {
        return Err(Error::InvalidParameter(format!(
            "label {l} outside {class_count} classes"
        )));
    }
    let mut rng = seed::rng(seed::derive(seed_value, seed::TAG_PARTITION, 0, 0));
    let by_class = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); class_count];
        for (i, &l) in labels.iter().enumerate() {
            classes[l].push(i);
        }
        for c in &mut classes {
            c.shuffle(rng);
        }
        classes
    };

    let mut shards = vec![Vec::new(); n];
    match scheme {
        PartitionScheme::Homogeneous => {
            let mut all: Vec<usize> = (0..labels.len()).collect();
            all.shuffle(&mut rng);
            let (q, r) = (all.len() / n, all.len() % n);
            let mut start = 0;
            for (i, shard) in shards.iter_mut().enumerate() {
                let len = q + usize::from(i < r);
                shard.extend_from_slice(&all[start..start + len]);
                start += len;
            }
        }
        PartitionScheme::Mild => {
            if n < 2 {
                return Err(Error::InvalidParameter(
                    "mild partition needs n >= 2".into(),
                ));
            }
            // Share of a class in units of 1/(2n): small, large, then regulars.
            let mut units = vec![1usize, 3];
            units.extend(std::iter::repeat_n(2, n - 2));
            for (c, members) in by_class(&mut rng).into_iter().enumerate() {
                let owners: Vec<usize> = {
                    let small = c % n;
                    let large = (c + 1) % n;
                    let rest = (0..n).filter(|&i| i != small && i != large);
                    [small, large].into_iter().chain(rest).collect()
                };
                let total = members.len();
                let mut cum = 0usize;
                let mut start = 0usize;
                for (u, owner) in units.iter().zip(owners) {
                    cum += u;
                    // Round half up on the cumulative boundary so sizes sum exactly.
                    let end = (cum * total + n) / (2 * n);
                    shards[owner].extend_from_slice(&members[start..end]);
                    start = end;
                }
                debug_assert_eq!(start, total);
            }
        }
        PartitionScheme::Extreme => {
            if !(2 * n).is_multiple_of(class_count) || 2 * n / class_count > n {
                return Err(Error::InvalidParameter(format!(
                    "extreme partition of {class_count} classes into 2n={} class-aligned chunks is infeasible",
                    2 * n
                )));
            }
            let per_class = 2 * n / class_count;
            let mut chunks: Vec<(usize, Vec<usize>)> = Vec::with_capacity(2 * n);
            for (c, mut members) in by_class(&mut rng).into_iter().enumerate() {
                members.sort_unstable();
                let total = members.len();
                if total < per_class {
                    return Err(Error::InvalidParameter(format!(
                        "class {c} has {total} samples, fewer than its {per_class} chunks"
                    )));
                }
                for k in 0..per_class {
                    let (a, b) = (k * total / per_class, (k + 1) * total / per_class);
                    chunks.push((c, members[a..b].to_vec()));
                }
            }
            // Rejection sampling over random pairings; with at most n chunks per
            // class a valid pairing always exists and one is found quickly.
            let mut order: Vec<usize> = (0..chunks.len()).collect();
            let mut attempts = 0;
            loop {
                order.shuffle(&mut rng);
                if order.chunks(2).all(|p| chunks[p[0]].0 != chunks[p[1]].0) {
                    break;
                }
                attempts += 1;
                if attempts > 100_000 {
                    return Err(Error::InvalidParameter(
                        "could not pair extreme-partition chunks with distinct labels".into(),
                    ));
                }
            }
            for (shard, pair) in shards.iter_mut().zip(order.chunks(2)) {
                shard.extend_from_slice(&chunks[pair[0]].1);
                shard.extend_from_slice(&chunks[pair[1]].1);
            }
        }
    }
    for shard in &mut shards {
        shard.sort_unstable();
    }
    Ok(shards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn assert_cover(shards: &[Vec<usize>], len: usize) {
        let mut all: Vec<usize> = shards.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..len).collect::<Vec<_>>());
    }

    #[test]
    fn homogeneous_equal_split() {
        let labels: Vec<usize> = (0..100).map(|i| i % 10).collect();
        let shards = partition_data(&labels, 10, PartitionScheme::Homogeneous, 10, 1).unwrap();
        assert!(shards.iter().all(|s| s.len() == 10));
        assert_cover(&shards, 100);
        assert_eq!(
            shards,
            partition_data(&labels, 10, PartitionScheme::Homogeneous, 10, 1).unwrap()
        );
    }

    #[test]
    fn mild_single_class_sizes() {
        let labels = vec![0usize; 200];
        let shards = partition_data(&labels, 1, PartitionScheme::Mild, 10, 3).unwrap();
        let mut sizes: Vec<usize> = shards.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, [10, 20, 20, 20, 20, 20, 20, 20, 20, 30]);
        assert_eq!(shards[0].len(), 10);
        assert_eq!(shards[1].len(), 30);
    }

    #[test]
    fn mild_rotates_small_and_large() {
        let labels: Vec<usize> = (0..400).map(|i| i % 2).collect();
        let shards = partition_data(&labels, 2, PartitionScheme::Mild, 4, 3).unwrap();
        assert_cover(&shards, 400);
        let count = |s: &Vec<usize>, c| s.iter().filter(|&&i| labels[i] == c).count();
        // Class 0: client 0 small, client 1 large; class 1: client 1 small, client 2 large.
        assert_eq!([0, 1, 2, 3].map(|k| count(&shards[k], 0)), [25, 75, 50, 50]);
        assert_eq!([0, 1, 2, 3].map(|k| count(&shards[k], 1)), [50, 25, 75, 50]);
    }

    #[test]
    fn extreme_two_labels_each() {
        let labels: Vec<usize> = (0..1000).map(|i| (i * 7) % 10).collect();
        for seed in 0..5 {
            let shards = partition_data(&labels, 10, PartitionScheme::Extreme, 10, seed).unwrap();
            assert_cover(&shards, 1000);
            for s in &shards {
                let distinct: BTreeSet<usize> = s.iter().map(|&i| labels[i]).collect();
                assert_eq!(distinct.len(), 2);
            }
        }
    }

    #[test]
    fn extreme_infeasible() {
        let labels: Vec<usize> = (0..90).map(|i| i % 3).collect();
        assert!(partition_data(&labels, 3, PartitionScheme::Extreme, 10, 0).is_err());
        // One class, so no pair can have distinct labels.
        assert!(partition_data(&[0; 10], 1, PartitionScheme::Extreme, 1, 0).is_err());
        assert!(partition_data(&[0; 10], 1, PartitionScheme::Homogeneous, 0, 0).is_err());
    }

    #[test]
    fn parse_scheme() {
        assert_eq!(
            "mild".parse::<PartitionScheme>().unwrap(),
            PartitionScheme::Mild
        );
        assert!("wild".parse::<PartitionScheme>().is_err());
    }
}
