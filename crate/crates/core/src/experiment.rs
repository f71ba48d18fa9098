//! Experiment runner: configuration, the single-run pipeline and the grid.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    load_dataset, partition, preprocess_split, Dataset, DatasetName, LabeledData, PartitionMode,
};
use crate::error::HdcError;
use crate::federated::{initialize_clients, run_federated_training, FederationConfig, IndexMode};
use crate::hdc::{EncoderParams, EncoderShape};
use crate::metrics::{
    traffic_reduction, traffic_to_target, ConvergenceLog, LogRow, TestSet, TrafficLedger,
};

/// Everything needed to reproduce one run. Missing JSON fields take the
/// desk-scale defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetName,
    pub data_dir: PathBuf,
    pub partition: PartitionMode,
    pub n_clients: usize,
    /// Hypervector dimension `D`.
    pub dim: usize,
    /// Sub-model dimension `D̂`; `None` trains the full model (baseline).
    pub subdim: Option<usize>,
    pub global_epochs: usize,
    pub local_epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub index_mode: IndexMode,
    /// Random Fourier feature dimension; `None` keeps the input dimension.
    pub rffm_dim: Option<usize>,
    pub rffm_bandwidth: f64,
    /// Keep only the first `n` training samples.
    pub train_subset: Option<usize>,
    /// Keep only the first `n` test samples.
    pub test_subset: Option<usize>,
    pub eval_every: usize,
    pub bytes_per_element: u64,
    pub shuffle_local: bool,
    /// Worker threads; `None` uses the rayon default. Results do not depend on it.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    /// File stem for the outputs; derived from the configuration when absent.
    pub name: Option<String>,
    /// Extra accuracy targets reported in the summary.
    pub targets: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetName::Mnist,
            data_dir: PathBuf::from("data"),
            partition: PartitionMode::Iid,
            n_clients: 20,
            dim: 2048,
            subdim: None,
            global_epochs: 30,
            local_epochs: 5,
            lr: 0.01,
            seed: 7,
            index_mode: IndexMode::Random,
            rffm_dim: None,
            rffm_bandwidth: 1.0,
            train_subset: Some(8000),
            test_subset: Some(2000),
            eval_every: 1,
            bytes_per_element: 4,
            shuffle_local: false,
            threads: None,
            output_dir: PathBuf::from("results"),
            name: None,
            targets: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn sub_dim(&self) -> usize {
        self.subdim.unwrap_or(self.dim)
    }

    pub fn is_baseline(&self) -> bool {
        self.sub_dim() == self.dim
    }

    pub fn federation(&self) -> FederationConfig {
        FederationConfig {
            n_clients: self.n_clients,
            hd_dim: self.dim,
            sub_dim: self.sub_dim(),
            global_epochs: self.global_epochs,
            local_epochs: self.local_epochs,
            learning_rate: self.lr,
            index_mode: self.index_mode,
            partition: self.partition,
            master_seed: self.seed,
            bytes_per_element: self.bytes_per_element,
            shuffle_local: self.shuffle_local,
            eval_every: self.eval_every,
        }
    }

    /// Output file stem.
    pub fn run_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!(
                "{}_{}_D{}_sub{}_{}_s{}",
                self.dataset,
                self.partition,
                self.dim,
                self.sub_dim(),
                match self.index_mode {
                    IndexMode::Random => "random",
                    IndexMode::PartitionCycle => "cycle",
                },
                self.seed
            )
        })
    }

    pub fn validate(&self) -> Result<(), HdcError> {
        self.federation().validate()?;
        let fail = |msg: String| Err(HdcError::Config(msg));
        if self.rffm_dim == Some(0) {
            return fail("rffm_dim must be at least 1".into());
        }
        if !(self.rffm_bandwidth.is_finite() && self.rffm_bandwidth > 0.0) {
            return fail(format!(
                "rffm_bandwidth must be positive, got {}",
                self.rffm_bandwidth
            ));
        }
        if self.train_subset == Some(0) || self.test_subset == Some(0) {
            return fail("subset sizes must be at least 1".into());
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        if self.partition == PartitionMode::NonIid
            && self.n_clients * crate::data::CLASSES_PER_CLIENT < self.dataset.n_classes()
        {
            return fail(format!(
                "{} clients with {} classes each cannot cover the {} classes of {}",
                self.n_clients,
                crate::data::CLASSES_PER_CLIENT,
                self.dataset.n_classes(),
                self.dataset
            ));
        }
        if let Some(t) = self.targets.iter().find(|t| !t.is_finite()) {
            return fail(format!("accuracy target {t} is not finite"));
        }
        let name = self.run_name();
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            return fail(format!("run name {name:?} is not a plain file name"));
        }
        Ok(())
    }
}

/// Pipeline stage, named in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Preprocess,
    Partition,
    Encode,
    Train,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Preprocess => "preprocess",
            Stage::Partition => "partition",
            Stage::Encode => "encode",
            Stage::Train => "train",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct RunError {
    pub stage: Stage,
    #[source]
    pub source: HdcError,
}

impl RunError {
    fn at(stage: Stage) -> impl FnOnce(HdcError) -> RunError {
        move |source| RunError { stage, source }
    }

    /// 1 for configuration problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match (&self.stage, &self.source) {
            (Stage::Config, _) | (_, HdcError::Config(_)) => 1,
            _ => 2,
        }
    }
}

/// Bytes needed to reach one accuracy target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetResult {
    pub target: f64,
    /// `None` when the target was never reached.
    pub uplink_bytes: Option<u64>,
}

/// JSON run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub n_classes: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub shard_sizes: Vec<usize>,
    /// Distinct labels held by each client.
    pub shard_label_counts: Vec<usize>,
    pub classes_covered: usize,
    pub max_personalized_acc: Option<f64>,
    pub max_consensus_acc: Option<f64>,
    pub final_personalized_acc: Option<f64>,
    pub final_consensus_acc: Option<f64>,
    pub uplink_bytes_per_round: u64,
    pub uplink_bytes_total: u64,
    pub downlink_bytes_total: u64,
    pub traffic_to_target: Vec<TargetResult>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub log: ConvergenceLog,
    pub ledger: TrafficLedger,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// RFFM-space train and test splits, independent of the hypervector dimension.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub n_classes: usize,
    pub train: LabeledData,
    pub test: LabeledData,
}

/// Key of the values that determine [`Prepared`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct PrepKey {
    dataset: DatasetName,
    train_subset: Option<usize>,
    test_subset: Option<usize>,
    rffm_dim: Option<usize>,
    bandwidth_bits: u64,
    seed: u64,
}

impl PrepKey {
    fn of(cfg: &RunConfig) -> Self {
        Self {
            dataset: cfg.dataset,
            train_subset: cfg.train_subset,
            test_subset: cfg.test_subset,
            rffm_dim: cfg.rffm_dim,
            bandwidth_bits: cfg.rffm_bandwidth.to_bits(),
            seed: cfg.seed,
        }
    }
}

fn encoder_for(cfg: &RunConfig, input_dim: usize) -> Result<EncoderParams, HdcError> {
    let shape = EncoderShape {
        input_dim,
        rffm_dim: cfg.rffm_dim.unwrap_or(input_dim),
        hd_dim: cfg.dim,
        bandwidth: cfg.rffm_bandwidth,
    };
    EncoderParams::new(shape, cfg.seed)
}

/// Takes the subset prefixes and maps both splits into RFFM space.
pub fn prepare(cfg: &RunConfig, data: &Dataset) -> Result<Prepared, RunError> {
    let mut train = data.train.clone();
    let mut test = data.test.clone();
    if let Some(n) = cfg.train_subset {
        train.truncate(n);
    }
    if let Some(n) = cfg.test_subset {
        test.truncate(n);
    }
    let encoder = encoder_for(cfg, data.dim()).map_err(RunError::at(Stage::Config))?;
    let pre = RunError::at(Stage::Preprocess);
    Ok(Prepared {
        n_classes: data.n_classes,
        train: preprocess_split(&train, &encoder).map_err(pre)?,
        test: preprocess_split(&test, &encoder).map_err(RunError::at(Stage::Preprocess))?,
    })
}

/// Loads the dataset named in `cfg`, runs it and writes CSV and JSON.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    cfg.validate().map_err(RunError::at(Stage::Config))?;
    let data = load_dataset(cfg.dataset, &cfg.data_dir).map_err(RunError::at(Stage::Load))?;
    run_on_dataset(cfg, &data)
}

/// Like [`run_experiment`] on already loaded data.
pub fn run_on_dataset(cfg: &RunConfig, data: &Dataset) -> Result<RunOutcome, RunError> {
    cfg.validate().map_err(RunError::at(Stage::Config))?;
    with_threads(cfg.threads, || {
        let prepared = prepare(cfg, data)?;
        run_prepared(cfg, &prepared, data.dim())
    })
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, RunError> + Send,
) -> Result<T, RunError> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError {
                stage: Stage::Config,
                source: HdcError::Config(format!("cannot start {n} worker threads: {e}")),
            })?
            .install(f),
    }
}

/// Partition, encode, train, evaluate and write the outputs.
pub fn run_prepared(
    cfg: &RunConfig,
    prepared: &Prepared,
    input_dim: usize,
) -> Result<RunOutcome, RunError> {
    cfg.validate().map_err(RunError::at(Stage::Config))?;
    let fed = cfg.federation();
    let encoder = encoder_for(cfg, input_dim).map_err(RunError::at(Stage::Config))?;

    let shards = partition(
        cfg.partition,
        &prepared.train.labels,
        prepared.n_classes,
        cfg.n_clients,
        cfg.seed,
    )
    .map_err(RunError::at(Stage::Partition))?;
    let parts: Vec<LabeledData> = shards.iter().map(|s| prepared.train.select(s)).collect();
    let shard_label_counts: Vec<usize> = parts
        .iter()
        .map(|p| p.labels.iter().collect::<BTreeSet<_>>().len())
        .collect();
    let classes_covered = parts
        .iter()
        .flat_map(|p| p.labels.iter())
        .collect::<BTreeSet<_>>()
        .len();

    let clients = initialize_clients(&parts, &encoder, prepared.n_classes, &fed)
        .map_err(RunError::at(Stage::Encode))?;
    drop(parts);
    let test = TestSet {
        encoded: encoder
            .encode_batch(prepared.test.features.view())
            .map_err(RunError::at(Stage::Encode))?,
        labels: prepared.test.labels.clone(),
    };

    let run =
        run_federated_training(&fed, clients, Some(&test)).map_err(RunError::at(Stage::Train))?;
    let mut log = ConvergenceLog::default();
    let mut up = 0;
    let mut down = 0;
    for r in &run.rounds {
        up += r.uplink_bytes;
        down += r.downlink_bytes;
        if let Some(e) = r.evaluation {
            log.push(LogRow {
                epoch: r.epoch,
                mean_personalized_acc: e.personalized,
                consensus_acc: e.consensus,
                uplink_bytes_cum: up,
                downlink_bytes_cum: down,
                mistakes_total: r.mistakes.iter().sum(),
            });
        }
    }

    let summary = RunSummary {
        config: cfg.clone(),
        n_classes: prepared.n_classes,
        n_train: prepared.train.len(),
        n_test: prepared.test.len(),
        shard_sizes: shards.iter().map(Vec::len).collect(),
        shard_label_counts,
        classes_covered,
        max_personalized_acc: log.max_personalized(),
        max_consensus_acc: log.max_consensus(),
        final_personalized_acc: log.last().map(|r| r.mean_personalized_acc),
        final_consensus_acc: log.last().map(|r| r.consensus_acc),
        uplink_bytes_per_round: crate::metrics::uplink_bytes_per_round(
            cfg.n_clients,
            prepared.n_classes,
            cfg.sub_dim(),
            cfg.bytes_per_element,
        ),
        uplink_bytes_total: run.ledger.cumulative_uplink,
        downlink_bytes_total: run.ledger.cumulative_downlink,
        traffic_to_target: cfg
            .targets
            .iter()
            .map(|&target| TargetResult {
                target,
                uplink_bytes: traffic_to_target(&log, target),
            })
            .collect(),
    };

    let (csv_path, json_path) = write_outputs(&cfg.output_dir, &cfg.run_name(), &log, &summary)
        .map_err(RunError::at(Stage::Write))?;
    Ok(RunOutcome {
        summary,
        log,
        ledger: run.ledger,
        csv_path,
        json_path,
    })
}

fn write_outputs(
    dir: &Path,
    name: &str,
    log: &ConvergenceLog,
    summary: &RunSummary,
) -> Result<(PathBuf, PathBuf), HdcError> {
    std::fs::create_dir_all(dir).map_err(|e| HdcError::io(dir, e))?;
    let csv_path = dir.join(format!("{name}.csv"));
    let json_path = dir.join(format!("{name}.json"));
    log.save_csv(&csv_path)?;
    let json =
        serde_json::to_string_pretty(summary).map_err(|e| HdcError::Output(e.to_string()))?;
    std::fs::write(&json_path, json + "\n").map_err(|e| HdcError::io(&json_path, e))?;
    Ok((csv_path, json_path))
}

/// One partition arm of the grid with its local epoch count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub partition: PartitionMode,
    pub local_epochs: usize,
}

/// Model size `D` and sub-model size `D̂` (`None` for the full model).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Method {
    pub dim: usize,
    pub subdim: Option<usize>,
}

impl Method {
    pub fn baseline(dim: usize) -> Self {
        Self { dim, subdim: None }
    }

    pub fn proposed(dim: usize, subdim: usize) -> Self {
        Self {
            dim,
            subdim: Some(subdim),
        }
    }

    pub fn sub_dim(&self) -> usize {
        self.subdim.unwrap_or(self.dim)
    }

    pub fn is_baseline(&self) -> bool {
        self.sub_dim() == self.dim
    }
}

/// Cartesian grid of datasets × arms × methods around a shared base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub base: RunConfig,
    pub datasets: Vec<DatasetName>,
    pub arms: Vec<Arm>,
    pub methods: Vec<Method>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::desk()
    }
}

fn methods_for(full: usize, sizes: [usize; 3]) -> Vec<Method> {
    let mut m = vec![Method::baseline(full)];
    m.extend(sizes.iter().map(|&d| Method::baseline(d)));
    m.extend(sizes.iter().map(|&d| Method::proposed(full, d)));
    m
}

impl GridConfig {
    /// 3 datasets × {iid with L=5, noniid with L=3} × 7 methods at desk scale:
    /// baselines D ∈ {2048, 1024, 512, 256} and D=2048 with D̂ ∈ {1024, 512, 256}.
    pub fn desk() -> Self {
        Self {
            base: RunConfig::default(),
            datasets: DatasetName::ALL.to_vec(),
            arms: vec![
                Arm {
                    partition: PartitionMode::Iid,
                    local_epochs: 5,
                },
                Arm {
                    partition: PartitionMode::NonIid,
                    local_epochs: 3,
                },
            ],
            methods: methods_for(2048, [1024, 512, 256]),
        }
    }

    /// Same layout at full scale: all samples, 100 epochs,
    /// baselines D ∈ {5000, 2500, 1000, 500} and D=5000 with D̂ ∈ {2500, 1000, 500}.
    pub fn paper() -> Self {
        let mut g = Self::desk();
        g.base.train_subset = None;
        g.base.test_subset = None;
        g.base.global_epochs = 100;
        g.base.eval_every = 1;
        g.methods = methods_for(5000, [2500, 1000, 500]);
        g
    }

    /// The run configurations in execution order (dataset-major).
    pub fn cells(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for &dataset in &self.datasets {
            for arm in &self.arms {
                for m in &self.methods {
                    out.push(RunConfig {
                        dataset,
                        partition: arm.partition,
                        local_epochs: arm.local_epochs,
                        dim: m.dim,
                        subdim: m.subdim.filter(|&s| s != m.dim),
                        name: None,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), HdcError> {
        if self.datasets.is_empty() || self.arms.is_empty() || self.methods.is_empty() {
            return Err(HdcError::Config("grid has an empty axis".into()));
        }
        self.cells().iter().try_for_each(RunConfig::validate)
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub config: RunConfig,
    pub outcome: Result<RunSummary, String>,
    pub log: Option<ConvergenceLog>,
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub dataset: DatasetName,
    pub partition: PartitionMode,
    pub method: String,
    pub dim: usize,
    pub subdim: usize,
    pub status: String,
    pub max_personalized_acc: Option<f64>,
    pub final_personalized_acc: Option<f64>,
    pub max_consensus_acc: Option<f64>,
    pub uplink_bytes_total: Option<u64>,
    /// Final accuracy of the largest full-model baseline in the same group.
    pub target_acc: Option<f64>,
    /// Cumulative uplink bytes when `target_acc` is first reached.
    pub uplink_bytes_to_target: Option<u64>,
    /// `1 - bytes / baseline bytes`, both measured to `target_acc`.
    pub traffic_reduction: Option<f64>,
    /// Maximum accuracy of the full-model baseline with `D = D̂`, if run.
    pub parity_baseline_max_acc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub cells: Vec<CellResult>,
    pub comparison: Vec<ComparisonRow>,
    pub comparison_path: PathBuf,
}

impl GridOutcome {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }
}

/// Runs every cell, writing one CSV/JSON pair per cell and `comparison.csv`.
/// A failing cell is recorded and the grid carries on.
pub fn run_grid(grid: &GridConfig) -> Result<GridOutcome, RunError> {
    grid.validate().map_err(RunError::at(Stage::Config))?;
    with_threads(grid.base.threads, || {
        let mut cells = Vec::new();
        let mut loaded: Option<(DatasetName, Result<Dataset, String>)> = None;
        let mut prepared: Option<(PrepKey, Prepared)> = None;
        for cfg in grid.cells() {
            if loaded.as_ref().map(|(n, _)| *n) != Some(cfg.dataset) {
                prepared = None;
                loaded = Some((
                    cfg.dataset,
                    load_dataset(cfg.dataset, &cfg.data_dir)
                        .map_err(|e| RunError::at(Stage::Load)(e).to_string()),
                ));
            }
            let data = match &loaded {
                Some((_, Ok(d))) => d,
                Some((_, Err(e))) => {
                    cells.push(CellResult {
                        config: cfg,
                        outcome: Err(e.clone()),
                        log: None,
                    });
                    continue;
                }
                None => unreachable!(),
            };
            let key = PrepKey::of(&cfg);
            if prepared.as_ref().map(|(k, _)| k) != Some(&key) {
                prepared = match prepare(&cfg, data) {
                    Ok(p) => Some((key, p)),
                    Err(e) => {
                        cells.push(CellResult {
                            config: cfg,
                            outcome: Err(e.to_string()),
                            log: None,
                        });
                        continue;
                    }
                };
            }
            let (_, prep) = prepared.as_ref().expect("prepared above");
            let result = run_prepared(&cfg, prep, data.dim());
            cells.push(match result {
                Ok(o) => CellResult {
                    config: cfg,
                    outcome: Ok(o.summary),
                    log: Some(o.log),
                },
                Err(e) => CellResult {
                    config: cfg,
                    outcome: Err(e.to_string()),
                    log: None,
                },
            });
        }
        let comparison = compare(&cells);
        let comparison_path = grid.base.output_dir.join("comparison.csv");
        write_comparison(&comparison_path, &comparison).map_err(RunError::at(Stage::Write))?;
        Ok(GridOutcome {
            cells,
            comparison,
            comparison_path,
        })
    })
}

/// Builds the comparison table. Within each (dataset, partition) group the
/// reference is the full-model baseline of the largest `D`; its final mean
/// personalized accuracy is the traffic target for every cell.
pub fn compare(cells: &[CellResult]) -> Vec<ComparisonRow> {
    let group = |c: &RunConfig| (c.dataset, c.partition);
    cells
        .iter()
        .map(|cell| {
            let cfg = &cell.config;
            let peers: Vec<&CellResult> = cells
                .iter()
                .filter(|o| group(&o.config) == group(cfg))
                .collect();
            let reference = peers
                .iter()
                .filter(|o| o.config.is_baseline() && o.outcome.is_ok())
                .max_by_key(|o| o.config.dim);
            let target_acc =
                reference.and_then(|r| r.outcome.as_ref().ok()?.final_personalized_acc);
            let to_target =
                |c: &CellResult| Some(traffic_to_target(c.log.as_ref()?, target_acc?)).flatten();
            let bytes = to_target(cell);
            let reference_bytes = reference.and_then(|r| to_target(r));
            let parity = peers
                .iter()
                .find(|o| o.config.is_baseline() && o.config.dim == cfg.sub_dim())
                .and_then(|o| o.outcome.as_ref().ok()?.max_personalized_acc);
            let summary = cell.outcome.as_ref().ok();
            ComparisonRow {
                dataset: cfg.dataset,
                partition: cfg.partition,
                method: if cfg.is_baseline() {
                    "baseline"
                } else {
                    "proposed"
                }
                .into(),
                dim: cfg.dim,
                subdim: cfg.sub_dim(),
                status: match &cell.outcome {
                    Ok(_) => "ok".into(),
                    Err(e) => format!("failed: {e}"),
                },
                max_personalized_acc: summary.and_then(|s| s.max_personalized_acc),
                final_personalized_acc: summary.and_then(|s| s.final_personalized_acc),
                max_consensus_acc: summary.and_then(|s| s.max_consensus_acc),
                uplink_bytes_total: summary.map(|s| s.uplink_bytes_total),
                target_acc,
                uplink_bytes_to_target: bytes,
                traffic_reduction: bytes
                    .zip(reference_bytes)
                    .map(|(b, r)| traffic_reduction(b, r)),
                parity_baseline_max_acc: parity,
            }
        })
        .collect()
}

fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<(), HdcError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HdcError::io(dir, e))?;
    }
    let out = |e: csv::Error| HdcError::Output(e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(out)?;
    for row in rows {
        w.serialize(row).map_err(out)?;
    }
    w.flush().map_err(|e| HdcError::io(path, e))
}
