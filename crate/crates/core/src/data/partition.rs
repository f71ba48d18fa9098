//! Splitting a training set across clients.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};
use crate::seed::{SeedTree, Stream};

/// How training samples are distributed over clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    /// Shards of a global shuffle; every client sees every class.
    #[default]
    Iid,
    /// Every client holds samples of a fixed number of classes only.
    NonIid,
}

impl std::str::FromStr for PartitionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "iid" => Ok(Self::Iid),
            "noniid" | "non-iid" => Ok(Self::NonIid),
            other => Err(format!(
                "unknown partition mode {other:?} (expected iid or noniid)"
            )),
        }
    }
}

impl std::fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Iid => "iid",
            Self::NonIid => "noniid",
        })
    }
}

/// Classes per client in the non-i.i.d. split.
pub const CLASSES_PER_CLIENT: usize = 2;

/// Class assignments are redrawn at most this many times to cover every class.
pub const MAX_COVERAGE_REDRAWS: usize = 1000;

/// Partition the training set according to `mode`. Each shard lists dataset
/// indices in ascending order.
pub fn partition(
    mode: PartitionMode,
    labels: &[usize],
    n_classes: usize,
    n_clients: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    match mode {
        PartitionMode::Iid => partition_iid(labels.len(), n_clients, seed),
        PartitionMode::NonIid => {
            partition_noniid(labels, n_classes, n_clients, CLASSES_PER_CLIENT, seed)
        }
    }
}

/// One seeded shuffle, then contiguous shards. The first `n_train % n_clients`
/// clients receive one extra sample.
pub fn partition_iid(n_train: usize, n_clients: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n_clients == 0 {
        return Err(HdcError::Config("at least one client is required".into()));
    }
    if n_clients > n_train {
        return Err(HdcError::Config(format!(
            "{n_clients} clients cannot share {n_train} training samples"
        )));
    }
    let mut order: Vec<usize> = (0..n_train).collect();
    order.shuffle(&mut SeedTree::new(seed).rng(Stream::IidShuffle, 0));

    let (base, extra) = (n_train / n_clients, n_train % n_clients);
    let mut rest = order.as_slice();
    Ok((0..n_clients)
        .map(|c| {
            let (shard, tail) = rest.split_at(base + usize::from(c < extra));
            rest = tail;
            let mut shard = shard.to_vec();
            shard.sort_unstable();
            shard
        })
        .collect())
}

/// Every client draws `classes_per_client` distinct classes uniformly; the
/// whole draw is repeated until each class has an owner. Each class's samples
/// are shuffled and split evenly among its owners, extra samples going to
/// the lowest-numbered owners.
pub fn partition_noniid(
    labels: &[usize],
    n_classes: usize,
    n_clients: usize,
    classes_per_client: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if n_clients == 0 {
        return Err(HdcError::Config("at least one client is required".into()));
    }
    if classes_per_client == 0 || classes_per_client > n_classes {
        return Err(HdcError::Config(format!(
            "cannot give {classes_per_client} of {n_classes} classes to each client"
        )));
    }
    if n_clients * classes_per_client < n_classes {
        return Err(HdcError::Config(format!(
            "{n_clients} clients with {classes_per_client} classes each cannot cover {n_classes} classes"
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
        return Err(HdcError::InvalidInput(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }

    let seeds = SeedTree::new(seed);
    let mut rng = seeds.rng(Stream::NonIidAssignment, 0);
    let mut owned = None;
    for _ in 0..MAX_COVERAGE_REDRAWS {
        let draw: Vec<Vec<usize>> = (0..n_clients)
            .map(|_| index::sample(&mut rng, n_classes, classes_per_client).into_vec())
            .collect();
        let mut covered = vec![false; n_classes];
        draw.iter().flatten().for_each(|&c| covered[c] = true);
        if covered.iter().all(|&c| c) {
            owned = Some(draw);
            break;
        }
    }
    let owned = owned.ok_or_else(|| {
        HdcError::Config(format!(
            "no class assignment covering all {n_classes} classes within {MAX_COVERAGE_REDRAWS} draws"
        ))
    })?;

    let mut shards = vec![Vec::new(); n_clients];
    for class in 0..n_classes {
        let owners: Vec<usize> = (0..n_clients)
            .filter(|&c| owned[c].contains(&class))
            .collect();
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < owners.len() {
            return Err(HdcError::Config(format!(
                "class {class} has {} samples for {} owners",
                members.len(),
                owners.len()
            )));
        }
        members.shuffle(&mut seeds.rng(Stream::NonIidSplit, class as u64));
        let (base, extra) = (members.len() / owners.len(), members.len() % owners.len());
        let mut rest = members.as_slice();
        for (k, &owner) in owners.iter().enumerate() {
            let (part, tail) = rest.split_at(base + usize::from(k < extra));
            rest = tail;
            shards[owner].extend_from_slice(part);
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
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn assert_exact_partition(shards: &[Vec<usize>], n: usize) {
        let mut all: Vec<usize> = shards.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn iid_even_split() {
        let shards = partition_iid(100, 20, 1).unwrap();
        assert_eq!(shards.len(), 20);
        assert!(shards.iter().all(|s| s.len() == 5));
        assert_exact_partition(&shards, 100);
    }

    #[test]
    fn iid_remainder_goes_first() {
        let shards = partition_iid(101, 20, 1).unwrap();
        assert_eq!(shards[0].len(), 6);
        assert!(shards[1..].iter().all(|s| s.len() == 5));
    }

    #[test]
    fn iid_is_seeded() {
        assert_eq!(
            partition_iid(50, 4, 9).unwrap(),
            partition_iid(50, 4, 9).unwrap()
        );
        assert_ne!(
            partition_iid(50, 4, 9).unwrap(),
            partition_iid(50, 4, 10).unwrap()
        );
    }

    #[test]
    fn iid_errors() {
        assert!(matches!(partition_iid(10, 0, 1), Err(HdcError::Config(_))));
        assert!(matches!(partition_iid(3, 4, 1), Err(HdcError::Config(_))));
    }

    fn balanced_labels(n_classes: usize, per_class: usize) -> Vec<usize> {
        (0..n_classes * per_class).map(|i| i % n_classes).collect()
    }

    #[test]
    fn noniid_two_classes_each_and_full_coverage() {
        let labels = balanced_labels(10, 50);
        let shards = partition_noniid(&labels, 10, 20, 2, 3).unwrap();
        assert_exact_partition(&shards, labels.len());
        for s in &shards {
            let classes: BTreeSet<usize> = s.iter().map(|&i| labels[i]).collect();
            assert_eq!(classes.len(), 2);
        }
    }

    #[test]
    fn noniid_covers_six_classes() {
        let labels = balanced_labels(6, 40);
        let shards = partition_noniid(&labels, 6, 20, 2, 11).unwrap();
        let covered: BTreeSet<usize> = shards.iter().flatten().map(|&i| labels[i]).collect();
        assert_eq!(covered.len(), 6);
    }

    #[test]
    fn noniid_infeasible_coverage() {
        let labels = balanced_labels(10, 5);
        assert!(matches!(
            partition_noniid(&labels, 10, 4, 2, 0),
            Err(HdcError::Config(_))
        ));
        assert!(partition_noniid(&labels, 10, 5, 0, 0).is_err());
        assert!(partition_noniid(&[0, 1, 5], 2, 2, 2, 0).is_err());
    }

    #[test]
    fn noniid_class_smaller_than_owner_count() {
        // Two samples of two classes, four clients owning both.
        let err = partition_noniid(&[0, 1], 2, 4, 2, 0).unwrap_err();
        assert!(matches!(err, HdcError::Config(_)));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("iid".parse::<PartitionMode>().unwrap(), PartitionMode::Iid);
        assert_eq!(
            "noniid".parse::<PartitionMode>().unwrap(),
            PartitionMode::NonIid
        );
        assert!("dirichlet".parse::<PartitionMode>().is_err());
        assert_eq!(
            serde_json::to_string(&PartitionMode::NonIid).unwrap(),
            "\"noniid\""
        );
    }

    proptest! {
        #[test]
        fn iid_is_exact_partition(n in 1usize..300, n_clients in 1usize..30, seed in any::<u64>()) {
            prop_assume!(n_clients <= n);
            let shards = partition_iid(n, n_clients, seed).unwrap();
            let sizes: BTreeSet<usize> = shards.iter().map(Vec::len).collect();
            prop_assert!(sizes.len() <= 2);
            assert_exact_partition(&shards, n);
        }

        #[test]
        fn noniid_is_exact_partition(per_class in 12usize..30, n_classes in 2usize..8, n_clients in 4usize..12, seed in any::<u64>()) {
            let labels = balanced_labels(n_classes, per_class);
            let shards = partition_noniid(&labels, n_classes, n_clients, 2, seed).unwrap();
            assert_exact_partition(&shards, labels.len());
            for s in &shards {
                let classes: BTreeSet<usize> = s.iter().map(|&i| labels[i]).collect();
                prop_assert_eq!(classes.len(), 2);
            }
        }
    }
}
