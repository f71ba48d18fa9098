//! Federated training with randomized sub-model retraining.
//!
//! Each global epoch the server picks `D̂` of the `D` hypervector positions.
//! Every client retrains only those positions of its own model for `L` local
//! passes and uploads the `K × D̂` result. The server averages the uploads
//! (unweighted, ascending client id) and every client overwrites the selected
//! positions with the average. Positions outside the selection stay as they
//! were, so each client keeps a personalized model. With `D̂ = D` this is
//! plain federated HDC retraining.

use ndarray::Array2;
use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{LabeledData, PartitionMode};
use crate::error::{HdcError, Result};
use crate::hdc::{
    init_prototypes, mean_of, restrict, restrict_samples, retrain_pass_in_order, scatter,
    EncoderParams, IndexSet, PrototypeModel, SubModel,
};
use crate::metrics::{evaluate, Evaluation, TestSet, TrafficLedger};
use crate::seed::{SeedTree, Stream};

/// How the per-epoch positions are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMode {
    /// `D̂` positions drawn uniformly without replacement every epoch.
    #[default]
    Random,
    /// `D` is shuffled once and cut into `D / D̂` disjoint blocks; epoch `g`
    /// uses block `(g - 1) mod (D / D̂)`.
    PartitionCycle,
}

impl std::str::FromStr for IndexMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "random" => Ok(Self::Random),
            "partition_cycle" | "partition-cycle" => Ok(Self::PartitionCycle),
            other => Err(format!(
                "unknown index mode {other:?} (expected random or partition_cycle)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederationConfig {
    pub n_clients: usize,
    /// Model dimension `D`.
    pub hd_dim: usize,
    /// Sub-model dimension `D̂`.
    pub sub_dim: usize,
    pub global_epochs: usize,
    pub local_epochs: usize,
    /// Used both to scale the initial prototypes and as the retraining step.
    pub learning_rate: f64,
    pub index_mode: IndexMode,
    pub partition: PartitionMode,
    pub master_seed: u64,
    /// Size of one transmitted model element, for traffic accounting only.
    pub bytes_per_element: u64,
    /// Reshuffle each client's samples before every local pass.
    pub shuffle_local: bool,
    /// Evaluate every `eval_every` epochs (the last epoch is always evaluated).
    pub eval_every: usize,
}

impl FederationConfig {
    /// Baseline configuration (`D̂ = D`) with the remaining knobs at their defaults.
    pub fn new(n_clients: usize, hd_dim: usize) -> Self {
        Self {
            n_clients,
            hd_dim,
            sub_dim: hd_dim,
            global_epochs: 30,
            local_epochs: 5,
            learning_rate: 0.01,
            index_mode: IndexMode::Random,
            partition: PartitionMode::Iid,
            master_seed: 0,
            bytes_per_element: 4,
            shuffle_local: false,
            eval_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HdcError::Config(msg));
        if self.n_clients == 0 {
            return fail("n_clients must be at least 1".into());
        }
        if self.hd_dim == 0 {
            return fail("hd_dim must be at least 1".into());
        }
        if self.sub_dim == 0 || self.sub_dim > self.hd_dim {
            return fail(format!(
                "sub_dim must lie in [1, {}], got {}",
                self.hd_dim, self.sub_dim
            ));
        }
        if self.index_mode == IndexMode::PartitionCycle && !self.hd_dim.is_multiple_of(self.sub_dim) {
            return fail(format!(
                "partition_cycle needs sub_dim to divide hd_dim ({} % {} != 0)",
                self.hd_dim, self.sub_dim
            ));
        }
        if self.local_epochs == 0 {
            return fail("local_epochs must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.bytes_per_element == 0 {
            return fail("bytes_per_element must be at least 1".into());
        }
        if self.eval_every == 0 {
            return fail("eval_every must be at least 1".into());
        }
        Ok(())
    }
}

/// Server-side generator of per-epoch index sets.
///
/// Clients can rebuild the same sets from the shared seed, so the sets never
/// travel over the network.
#[derive(Debug, Clone)]
pub struct IndexSelector {
    dim: usize,
    sub_dim: usize,
    mode: IndexMode,
    seeds: SeedTree,
    blocks: Vec<Vec<usize>>,
}

impl IndexSelector {
    pub fn new(cfg: &FederationConfig) -> Result<Self> {
        if cfg.sub_dim == 0 || cfg.sub_dim > cfg.hd_dim {
            return Err(HdcError::Config(format!(
                "sub_dim must lie in [1, {}], got {}",
                cfg.hd_dim, cfg.sub_dim
            )));
        }
        let seeds = SeedTree::new(cfg.master_seed);
        match cfg.index_mode {
            IndexMode::Random => Ok(Self {
                dim: cfg.hd_dim,
                sub_dim: cfg.sub_dim,
                mode: IndexMode::Random,
                seeds,
                blocks: Vec::new(),
            }),
            IndexMode::PartitionCycle => {
                let mut perm: Vec<usize> = (0..cfg.hd_dim).collect();
                perm.shuffle(&mut seeds.rng(Stream::IndexBlocks, 0));
                Self::with_permutation(perm, cfg.sub_dim, seeds)
            }
        }
    }

    /// Block-cycling selector over an explicit permutation of `0..D`.
    pub fn with_permutation(
        permutation: Vec<usize>,
        sub_dim: usize,
        seeds: SeedTree,
    ) -> Result<Self> {
        let dim = permutation.len();
        if sub_dim == 0 || !dim.is_multiple_of(sub_dim) {
            return Err(HdcError::Config(format!(
                "partition_cycle needs sub_dim to divide hd_dim ({dim} % {sub_dim} != 0)"
            )));
        }
        IndexSet::new(permutation.clone(), dim, 0)?;
        let blocks = permutation
            .chunks(sub_dim)
            .map(|c| {
                let mut b = c.to_vec();
                b.sort_unstable();
                b
            })
            .collect();
        Ok(Self {
            dim,
            sub_dim,
            mode: IndexMode::PartitionCycle,
            seeds,
            blocks,
        })
    }

    /// Index set for global epoch `epoch` (1-based). Indices are ascending.
    pub fn select(&self, epoch: usize) -> IndexSet {
        let indices = match self.mode {
            IndexMode::Random => {
                let mut rng = self.seeds.rng(Stream::EpochIndices, epoch as u64);
                let mut v = index::sample(&mut rng, self.dim, self.sub_dim).into_vec();
                v.sort_unstable();
                v
            }
            IndexMode::PartitionCycle => {
                self.blocks[epoch.saturating_sub(1) % self.blocks.len()].clone()
            }
        };
        IndexSet::new(indices, self.dim, epoch)
            .expect("selector produces distinct in-range indices")
    }
}

/// Index set for `epoch` under `cfg`.
pub fn select_indices(epoch: usize, cfg: &FederationConfig) -> Result<IndexSet> {
    Ok(IndexSelector::new(cfg)?.select(epoch))
}

/// One participant: its encoded local data and its personalized model.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientState {
    pub id: usize,
    pub encoded: Array2<f64>,
    pub labels: Vec<usize>,
    pub model: PrototypeModel,
}

impl ClientState {
    /// Client from already encoded data; the model is initialized from it.
    pub fn from_encoded(
        id: usize,
        encoded: Array2<f64>,
        labels: Vec<usize>,
        n_classes: usize,
        learning_rate: f64,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(HdcError::Config(format!(
                "client {id} has no training data"
            )));
        }
        let model = init_prototypes(encoded.view(), &labels, n_classes, learning_rate)?;
        Ok(Self {
            id,
            encoded,
            labels,
            model,
        })
    }
}

/// Encodes every client's (RFFM-space) shard once and initializes its model.
pub fn initialize_clients(
    partitions: &[LabeledData],
    encoder: &EncoderParams,
    n_classes: usize,
    cfg: &FederationConfig,
) -> Result<Vec<ClientState>> {
    if encoder.hd_dim() != cfg.hd_dim {
        return Err(HdcError::Config(format!(
            "encoder produces {}-dimensional hypervectors, configuration expects {}",
            encoder.hd_dim(),
            cfg.hd_dim
        )));
    }
    partitions
        .par_iter()
        .enumerate()
        .map(|(id, shard)| {
            if shard.is_empty() {
                return Err(HdcError::Config(format!(
                    "client {id} has an empty partition"
                )));
            }
            let encoded = encoder.encode_batch(shard.features.view())?;
            ClientState::from_encoded(
                id,
                encoded,
                shard.labels.clone(),
                n_classes,
                cfg.learning_rate,
            )
        })
        .collect()
}

/// Output of one client's local retraining.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUpdate {
    pub sub: SubModel,
    /// Mispredictions summed over the local passes.
    pub mistakes: usize,
}

/// `L` retraining passes on the positions in `idx`. The client's full model
/// is not modified; write-back happens after aggregation.
pub fn local_update(
    client: &ClientState,
    idx: &IndexSet,
    cfg: &FederationConfig,
) -> Result<LocalUpdate> {
    let mut sub = restrict(&client.model, idx)?;
    let full_range = idx.len() == client.encoded.ncols()
        && idx.indices().iter().enumerate().all(|(t, &i)| t == i);
    let restricted;
    let samples = if full_range {
        client.encoded.view()
    } else {
        restricted = restrict_samples(client.encoded.view(), idx)?;
        restricted.view()
    };

    let seeds = SeedTree::new(cfg.master_seed);
    let mut order: Vec<usize> = (0..client.labels.len()).collect();
    let mut mistakes = 0;
    for pass in 0..cfg.local_epochs {
        if cfg.shuffle_local {
            let key = (idx.epoch() * cfg.local_epochs + pass) as u64;
            order.shuffle(&mut seeds.rng2(Stream::LocalShuffle, client.id as u64, key));
        }
        mistakes += retrain_pass_in_order(
            &mut sub.model,
            samples,
            &client.labels,
            order.iter().copied(),
            cfg.learning_rate,
        )?;
    }
    Ok(LocalUpdate { sub, mistakes })
}

/// Unweighted elementwise mean of the uploaded sub-models, in the given order.
pub fn aggregate(views: &[SubModel]) -> Result<SubModel> {
    let first = views
        .first()
        .ok_or_else(|| HdcError::Aggregation("no sub-models to aggregate".into()))?;
    if let Some(other) = views
        .iter()
        .find(|v| v.indices.indices() != first.indices.indices())
    {
        return Err(HdcError::Aggregation(format!(
            "index sets differ (epochs {} and {})",
            first.indices.epoch(),
            other.indices.epoch()
        )));
    }
    let mean = mean_of(views.iter().map(|v| v.model.prototypes()))?;
    Ok(SubModel {
        indices: first.indices.clone(),
        model: PrototypeModel::from_array(mean)?,
    })
}

/// Log entry for one global epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based global epoch.
    pub epoch: usize,
    pub indices: IndexSet,
    /// Local mispredictions per client, by client id.
    pub mistakes: Vec<usize>,
    pub uplink_bytes: u64,
    pub downlink_bytes: u64,
    pub evaluation: Option<Evaluation>,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub clients: Vec<ClientState>,
    pub rounds: Vec<RoundRecord>,
    pub ledger: TrafficLedger,
}

/// Runs `G` global epochs of select → local update → aggregate → write-back.
///
/// When `test` is given the personalized and consensus accuracies are
/// recorded on the configured cadence.
pub fn run_federated_training(
    cfg: &FederationConfig,
    clients: Vec<ClientState>,
    test: Option<&TestSet>,
) -> Result<TrainingRun> {
    run_federated_training_with(cfg, clients, test, |_| {})
}

/// [`run_federated_training`] calling `on_round` after every epoch.
pub fn run_federated_training_with(
    cfg: &FederationConfig,
    mut clients: Vec<ClientState>,
    test: Option<&TestSet>,
    mut on_round: impl FnMut(&RoundRecord),
) -> Result<TrainingRun> {
    cfg.validate()?;
    if clients.len() != cfg.n_clients {
        return Err(HdcError::Config(format!(
            "configuration expects {} clients, got {}",
            cfg.n_clients,
            clients.len()
        )));
    }
    let n_classes = clients[0].model.n_classes();
    for c in &clients {
        if c.model.dim() != cfg.hd_dim || c.encoded.ncols() != cfg.hd_dim {
            return Err(HdcError::Config(format!(
                "client {} holds {}-dimensional data, configuration expects {}",
                c.id,
                c.model.dim(),
                cfg.hd_dim
            )));
        }
        if c.model.n_classes() != n_classes {
            return Err(HdcError::Config(format!(
                "client {} disagrees on the class count",
                c.id
            )));
        }
    }

    let selector = IndexSelector::new(cfg)?;
    let mut ledger = TrafficLedger::new(cfg.bytes_per_element);
    let mut rounds = Vec::with_capacity(cfg.global_epochs);
    for epoch in 1..=cfg.global_epochs {
        let idx = selector.select(epoch);
        let updates = clients
            .par_iter()
            .map(|c| local_update(c, &idx, cfg))
            .collect::<Result<Vec<_>>>()?;
        let mistakes = updates.iter().map(|u| u.mistakes).collect();
        let subs: Vec<SubModel> = updates.into_iter().map(|u| u.sub).collect();
        let global = aggregate(&subs)?;
        clients
            .par_iter_mut()
            .try_for_each(|c| scatter(&mut c.model, &global))?;
        let traffic = ledger.record_round(cfg.n_clients, n_classes, idx.len());

        let evaluation = match test {
            Some(test) if epoch % cfg.eval_every == 0 || epoch == cfg.global_epochs => {
                let models: Vec<PrototypeModel> = clients.iter().map(|c| c.model.clone()).collect();
                Some(evaluate(&models, test)?)
            }
            _ => None,
        };
        let record = RoundRecord {
            epoch,
            indices: idx,
            mistakes,
            uplink_bytes: traffic.uplink,
            downlink_bytes: traffic.downlink,
            evaluation,
        };
        on_round(&record);
        rounds.push(record);
    }
    Ok(TrainingRun {
        clients,
        rounds,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdc::retrain_pass;
    use ndarray::array;
    use proptest::prelude::*;

    fn toy_client(id: usize, seed: u64, n: usize, dim: usize) -> ClientState {
        let encoded = Array2::from_shape_fn((n, dim), |(i, j)| {
            let x = (i * 31 + j * 17 + id * 7 + seed as usize) as f64;
            (x * 0.37).sin() + if j % 3 == i % 3 { 0.8 } else { 0.0 }
        });
        let labels = (0..n).map(|i| i % 3).collect();
        ClientState::from_encoded(id, encoded, labels, 3, 0.01).unwrap()
    }

    fn cfg(n: usize, dim: usize, sub: usize) -> FederationConfig {
        FederationConfig {
            sub_dim: sub,
            global_epochs: 4,
            local_epochs: 2,
            master_seed: 5,
            ..FederationConfig::new(n, dim)
        }
    }

    #[test]
    fn validation() {
        assert!(cfg(2, 10, 5).validate().is_ok());
        assert!(cfg(0, 10, 5).validate().is_err());
        assert!(cfg(2, 10, 11).validate().is_err());
        assert!(cfg(2, 10, 0).validate().is_err());
        let mut c = cfg(2, 10, 3);
        c.index_mode = IndexMode::PartitionCycle;
        assert!(c.validate().is_err());
        let mut c = cfg(2, 10, 5);
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg(2, 10, 5);
        c.local_epochs = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn full_subdim_selects_everything() {
        for mode in [IndexMode::Random, IndexMode::PartitionCycle] {
            let mut c = cfg(1, 12, 12);
            c.index_mode = mode;
            let idx = select_indices(3, &c).unwrap();
            assert_eq!(idx.indices(), (0..12).collect::<Vec<_>>().as_slice());
        }
    }

    #[test]
    fn block_cycling_with_identity_shuffle() {
        let sel = IndexSelector::with_permutation(vec![0, 1, 2, 3], 2, SeedTree::new(0)).unwrap();
        let seq: Vec<Vec<usize>> = (1..=4).map(|g| sel.select(g).indices().to_vec()).collect();
        assert_eq!(seq, vec![vec![0, 1], vec![2, 3], vec![0, 1], vec![2, 3]]);
        assert!(IndexSelector::with_permutation(vec![0, 1, 2], 2, SeedTree::new(0)).is_err());
        assert!(IndexSelector::with_permutation(vec![0, 0, 2, 3], 2, SeedTree::new(0)).is_err());
    }

    #[test]
    fn partition_cycle_blocks_cover_dimension_disjointly() {
        let mut c = cfg(1, 20, 5);
        c.index_mode = IndexMode::PartitionCycle;
        let sel = IndexSelector::new(&c).unwrap();
        let mut all: Vec<usize> = (1..=4)
            .flat_map(|g| sel.select(g).indices().to_vec())
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        assert_eq!(
            sel.select(1),
            IndexSet::new(sel.select(5).indices().to_vec(), 20, 1).unwrap()
        );
    }

    #[test]
    fn random_selection_is_seeded() {
        let c = cfg(1, 100, 10);
        let a: Vec<IndexSet> = (1..=5).map(|g| select_indices(g, &c).unwrap()).collect();
        let b: Vec<IndexSet> = (1..=5).map(|g| select_indices(g, &c).unwrap()).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert!(a.iter().all(|s| s.len() == 10));
        assert!(IndexSelector::new(&cfg(1, 10, 11)).is_err());
    }

    #[test]
    fn identical_data_gives_identical_models() {
        let a = toy_client(0, 1, 9, 6);
        let mut b = toy_client(0, 1, 9, 6);
        b.id = 1;
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn empty_partition_is_rejected() {
        let enc = EncoderParams::new(crate::hdc::EncoderShape::new(2, 8), 0).unwrap();
        let parts = vec![
            LabeledData::new(array![[1.0, 0.0]], vec![0]).unwrap(),
            LabeledData::new(Array2::zeros((0, 2)), vec![]).unwrap(),
        ];
        let err = initialize_clients(&parts, &enc, 2, &cfg(2, 8, 8)).unwrap_err();
        assert!(matches!(err, HdcError::Config(_)));
        assert!(initialize_clients(&parts[..1], &enc, 2, &cfg(1, 9, 9)).is_err());
    }

    #[test]
    fn local_update_leaves_client_untouched() {
        let client = toy_client(0, 0, 12, 8);
        let before = client.clone();
        let idx = IndexSet::new(vec![1, 4, 6], 8, 1).unwrap();
        let up = local_update(&client, &idx, &cfg(1, 8, 3)).unwrap();
        assert_eq!(client, before);
        assert_eq!(up.sub.model.dim(), 3);
        assert!(up.sub.model.prototypes().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zero_step_local_update_is_restriction() {
        let client = toy_client(0, 0, 12, 8);
        let idx = IndexSet::new(vec![0, 3, 5], 8, 1).unwrap();
        let mut c = cfg(1, 8, 3);
        c.learning_rate = 0.0;
        let up = local_update(&client, &idx, &c).unwrap();
        assert_eq!(up.sub, restrict(&client.model, &idx).unwrap());
    }

    #[test]
    fn mistake_free_local_update_is_restriction() {
        let encoded = array![[1.0, 0.0, 0.1], [0.0, 1.0, 0.1]];
        let client = ClientState::from_encoded(0, encoded, vec![0, 1], 2, 0.01).unwrap();
        let idx = IndexSet::new(vec![0, 1], 3, 1).unwrap();
        let up = local_update(&client, &idx, &cfg(1, 3, 2)).unwrap();
        assert_eq!(up.mistakes, 0);
        assert_eq!(up.sub, restrict(&client.model, &idx).unwrap());
    }

    #[test]
    fn aggregation_edge_cases() {
        let idx = IndexSet::new(vec![0, 2], 4, 1).unwrap();
        let v = SubModel {
            indices: idx.clone(),
            model: PrototypeModel::from_array(array![[0.3, -1.7], [2.2, 0.1]]).unwrap(),
        };
        assert_eq!(aggregate(&vec![v.clone(); 20]).unwrap(), v);
        let neg = SubModel {
            indices: idx.clone(),
            model: PrototypeModel::from_array(-v.model.prototypes().to_owned()).unwrap(),
        };
        assert_eq!(
            aggregate(&[v.clone(), neg]).unwrap().model,
            PrototypeModel::zeros(2, 2)
        );
        let other = SubModel {
            indices: IndexSet::new(vec![1, 2], 4, 1).unwrap(),
            model: v.model.clone(),
        };
        assert!(matches!(
            aggregate(&[v.clone(), other]),
            Err(HdcError::Aggregation(_))
        ));
        let wrong_shape = SubModel {
            indices: idx,
            model: PrototypeModel::zeros(3, 2),
        };
        assert!(aggregate(&[v, wrong_shape]).is_err());
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn aggregation_matches_naive_mean() {
        // Naive oracle: plain sum then one division.
        let idx = IndexSet::new((0..7).collect(), 7, 1).unwrap();
        let views: Vec<SubModel> = (0..20)
            .map(|c| SubModel {
                indices: idx.clone(),
                model: PrototypeModel::from_array(Array2::from_shape_fn((3, 7), |(i, j)| {
                    ((c * 131 + i * 17 + j * 7) as f64 * 0.618).sin() * 3.0
                }))
                .unwrap(),
            })
            .collect();
        let got = aggregate(&views).unwrap();
        for i in 0..3 {
            for j in 0..7 {
                let mut s = 0.0;
                for v in &views {
                    s += v.model.prototypes()[[i, j]];
                }
                assert!((got.model.prototypes()[[i, j]] - s / 20.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_epochs_keep_initial_models() {
        let clients: Vec<_> = (0..3).map(|i| toy_client(i, 2, 9, 6)).collect();
        let mut c = cfg(3, 6, 3);
        c.global_epochs = 0;
        let run = run_federated_training(&c, clients.clone(), None).unwrap();
        assert!(run.rounds.is_empty());
        assert_eq!(run.clients, clients);
        assert_eq!(run.ledger.cumulative_uplink, 0);
    }

    #[test]
    fn single_client_full_model_equals_centralized() {
        let client = toy_client(0, 3, 30, 10);
        let mut reference = client.model.clone();
        let c = cfg(1, 10, 10);
        for _ in 0..c.global_epochs * c.local_epochs {
            retrain_pass(
                &mut reference,
                client.encoded.view(),
                &client.labels,
                c.learning_rate,
            )
            .unwrap();
        }
        let run = run_federated_training(&c, vec![client], None).unwrap();
        assert_eq!(run.clients[0].model, reference);
    }

    #[test]
    fn client_count_must_match() {
        let clients: Vec<_> = (0..2).map(|i| toy_client(i, 2, 9, 6)).collect();
        assert!(run_federated_training(&cfg(3, 6, 3), clients, None).is_err());
    }

    #[test]
    fn shuffled_local_order_is_deterministic() {
        let clients: Vec<_> = (0..3).map(|i| toy_client(i, 4, 15, 8)).collect();
        let mut c = cfg(3, 8, 4);
        c.shuffle_local = true;
        let a = run_federated_training(&c, clients.clone(), None).unwrap();
        let b = run_federated_training(&c, clients, None).unwrap();
        assert_eq!(a.clients, b.clients);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn write_back_locality_and_consensus(seed in any::<u64>(), sub in 1usize..12, mode in prop::bool::ANY) {
            let clients: Vec<_> = (0..4).map(|i| toy_client(i, seed % 97, 10, 12)).collect();
            let mut c = cfg(4, 12, sub);
            c.master_seed = seed;
            c.global_epochs = 1;
            if mode && 12 % sub == 0 {
                c.index_mode = IndexMode::PartitionCycle;
            }
            let run = run_federated_training(&c, clients.clone(), None).unwrap();
            let idx = &run.rounds[0].indices;
            for (after, before) in run.clients.iter().zip(&clients) {
                for j in (0..12).filter(|j| !idx.indices().contains(j)) {
                    prop_assert_eq!(after.model.prototypes().column(j).to_owned(), before.model.prototypes().column(j).to_owned());
                }
                for &j in idx.indices() {
                    prop_assert_eq!(after.model.prototypes().column(j).to_owned(), run.clients[0].model.prototypes().column(j).to_owned());
                }
            }
            prop_assert_eq!(run.ledger.cumulative_uplink, 4 * 3 * sub as u64 * 4);
        }
    }
}
