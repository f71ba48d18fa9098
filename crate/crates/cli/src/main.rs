use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fedhdc::data::{DatasetName, PartitionMode};
use fedhdc::experiment::{run_experiment, run_grid, GridConfig, RunConfig, RunError, Stage};
use fedhdc::federated::IndexMode;
use fedhdc::HdcError;

/// Federated hyperdimensional computing experiments.
///
/// Exit status: 0 on success, 1 for a bad configuration, 2 for a runtime failure.
#[derive(Debug, Parser)]
#[command(name = "fedhdc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one configuration and write `<name>.csv` and `<name>.json`.
    Run(RunArgs),
    /// Run the dataset × partition × method grid and write `comparison.csv`.
    Grid(GridArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON file mirroring the run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Paper,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// JSON grid file (`base`, `datasets`, `arms`, `methods`).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: Preset,
    /// Restrict the grid to these datasets.
    #[arg(long, value_delimiter = ',')]
    datasets: Vec<DatasetName>,
    #[command(flatten)]
    overrides: Overrides,
    /// Print the cells and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Default, Args)]
struct Overrides {
    #[arg(long)]
    dataset: Option<DatasetName>,
    #[arg(long, env = "FEDHDC_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    partition: Option<PartitionMode>,
    #[arg(long)]
    n_clients: Option<usize>,
    /// Hypervector dimension D.
    #[arg(long)]
    dim: Option<usize>,
    /// Sub-model dimension; omit for the full-model baseline.
    #[arg(long)]
    subdim: Option<usize>,
    #[arg(long)]
    global_epochs: Option<usize>,
    #[arg(long)]
    local_epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// random or partition_cycle
    #[arg(long)]
    index_mode: Option<IndexMode>,
    /// Random Fourier feature dimension (default: input dimension).
    #[arg(long)]
    rffm_dim: Option<usize>,
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Training prefix size; 0 uses the full split.
    #[arg(long)]
    train_subset: Option<usize>,
    /// Test prefix size; 0 uses the full split.
    #[arg(long)]
    test_subset: Option<usize>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    bytes_per_element: Option<u64>,
    #[arg(long)]
    shuffle_local: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output file stem.
    #[arg(long)]
    name: Option<String>,
    /// Accuracy target for the traffic report; repeatable.
    #[arg(long = "target")]
    targets: Vec<f64>,
}

impl Overrides {
    fn apply(&self, c: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = &self.$field { c.$target = v.clone(); })*
            };
        }
        set!(
            dataset => dataset,
            data_dir => data_dir,
            partition => partition,
            n_clients => n_clients,
            dim => dim,
            global_epochs => global_epochs,
            local_epochs => local_epochs,
            lr => lr,
            seed => seed,
            index_mode => index_mode,
            bandwidth => rffm_bandwidth,
            eval_every => eval_every,
            bytes_per_element => bytes_per_element,
            out => output_dir,
        );
        if self.subdim.is_some() {
            c.subdim = self.subdim;
        }
        if self.rffm_dim.is_some() {
            c.rffm_dim = self.rffm_dim;
        }
        if let Some(n) = self.train_subset {
            c.train_subset = (n > 0).then_some(n);
        }
        if let Some(n) = self.test_subset {
            c.test_subset = (n > 0).then_some(n);
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        if self.name.is_some() {
            c.name = self.name.clone();
        }
        if self.shuffle_local {
            c.shuffle_local = true;
        }
        if !self.targets.is_empty() {
            c.targets = self.targets.clone();
        }
    }
}

fn config_error(message: String) -> RunError {
    RunError {
        stage: Stage::Config,
        source: HdcError::Config(message),
    }
}

fn read_text(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn json_error(path: &Path) -> impl FnOnce(serde_json::Error) -> RunError + '_ {
    move |e| config_error(format!("{}: {e}", path.display()))
}

fn run(args: RunArgs) -> Result<(), RunError> {
    let mut cfg: RunConfig = match &args.config {
        Some(path) => serde_json::from_str(&read_text(path)?).map_err(json_error(path))?,
        None => RunConfig::default(),
    };
    args.overrides.apply(&mut cfg);
    cfg.validate().map_err(|source| RunError {
        stage: Stage::Config,
        source,
    })?;
    if args.dry_run {
        println!(
            "{}",
            serde_json::to_string_pretty(&cfg).expect("config serializes")
        );
        return Ok(());
    }
    let out = run_experiment(&cfg)?;
    let s = &out.summary;
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    println!(
        "{}: max personalized {} (final {}), max consensus {}, uplink {} B",
        cfg.run_name(),
        fmt(s.max_personalized_acc),
        fmt(s.final_personalized_acc),
        fmt(s.max_consensus_acc),
        s.uplink_bytes_total
    );
    for t in &s.traffic_to_target {
        match t.uplink_bytes {
            Some(b) => println!("  target {:.4}: {b} B", t.target),
            None => println!("  target {:.4}: not reached", t.target),
        }
    }
    println!(
        "wrote {} and {}",
        out.csv_path.display(),
        out.json_path.display()
    );
    Ok(())
}

fn grid(args: GridArgs) -> Result<bool, RunError> {
    let mut grid: GridConfig = match (&args.config, args.preset) {
        (Some(path), _) => serde_json::from_str(&read_text(path)?).map_err(json_error(path))?,
        (None, Preset::Desk) => GridConfig::desk(),
        (None, Preset::Paper) => GridConfig::paper(),
    };
    args.overrides.apply(&mut grid.base);
    if args.overrides.dim.is_some()
        || args.overrides.subdim.is_some()
        || args.overrides.partition.is_some()
    {
        return Err(config_error(
            "--dim, --subdim and --partition are grid axes; set them in a grid file".into(),
        ));
    }
    if !args.datasets.is_empty() {
        grid.datasets = args.datasets.clone();
    }
    grid.validate().map_err(|source| RunError {
        stage: Stage::Config,
        source,
    })?;
    if args.dry_run {
        for c in grid.cells() {
            println!("{}", c.run_name());
        }
        return Ok(true);
    }
    let out = run_grid(&grid)?;
    for cell in &out.cells {
        match &cell.outcome {
            Ok(s) => println!(
                "{}: max personalized {:.4}",
                cell.config.run_name(),
                s.max_personalized_acc.unwrap_or(f64::NAN)
            ),
            Err(e) => eprintln!("{}: {e}", cell.config.run_name()),
        }
    }
    println!("wrote {}", out.comparison_path.display());
    Ok(out.failures() == 0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args).map(|()| true),
        Command::Grid(args) => grid(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some grid cells failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
