use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use naps::harness::{
    parse_methods, predict_nodes, run_experiment, summarize_dataset, Dataset, DatasetSummary,
    ExperimentConfig, Method,
};
use naps::io::{self, DatasetPaths};
use naps::synthetic::{make_exchangeable, make_naps_showcase};
use naps::{Error, Result};

#[derive(Parser)]
#[command(name = "naps", version, about = "Neighbourhood-adaptive conformal prediction sets for node classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the repeated calibration/evaluation experiment.
    Run(RunArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Print dataset statistics as one CSV row.
    Summarize(SummarizeArgs),
    /// Print prediction sets for selected nodes.
    Predict(PredictArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Common prefix of `<p>.edges`, `<p>.labels` and `<p>.probs.csv`.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Node ids forming the test scope, one per line (default: all nodes).
    #[arg(long)]
    test_nodes: Option<PathBuf>,
}

impl DataArgs {
    fn paths(&self) -> Result<DatasetPaths> {
        let mut paths = match &self.data {
            Some(prefix) => DatasetPaths::with_prefix(prefix),
            None => match (&self.edges, &self.labels, &self.probs) {
                (Some(e), Some(l), Some(p)) => DatasetPaths {
                    edges: e.clone(),
                    labels: l.clone(),
                    probs: p.clone(),
                    test_nodes: None,
                },
                _ => {
                    return Err(Error::InvalidInput(
                        "give --data PREFIX or all of --edges, --labels and --probs".into(),
                    ))
                }
            },
        };
        if let Some(e) = &self.edges {
            paths.edges = e.clone();
        }
        if let Some(l) = &self.labels {
            paths.labels = l.clone();
        }
        if let Some(p) = &self.probs {
            paths.probs = p.clone();
        }
        paths.test_nodes = self.test_nodes.clone();
        Ok(paths)
    }

    fn load(&self) -> Result<Dataset> {
        io::load_dataset(&self.paths()?)
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// key=value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eval_batch: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    min_neighborhood: Option<usize>,
    /// Comma-separated subset of naive_aps,naps,naps_hop_decay,naps_alternating.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            for (line, key, value) in io::parse_key_values(&io::read_text(path)?, path)? {
                cfg.set(&key, &value).map_err(|e| Error::Parse {
                    path: path.clone(),
                    line,
                    msg: e.to_string(),
                })?;
            }
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.eval_batch {
            cfg.eval_batch = v;
        }
        if let Some(v) = self.reps {
            cfg.repetitions = v;
        }
        if let Some(v) = self.min_neighborhood {
            cfg.min_neighborhood = v;
        }
        if let Some(v) = &self.methods {
            cfg.methods = parse_methods(v)?;
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output prefix; writes `<out>.csv` and `<out>.txt`.
    #[arg(long, default_value = "naps_report")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Homophilous SBM where global calibration overcovers.
    Showcase,
    /// Structure-free, calibrated control dataset.
    Exchangeable,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "showcase")]
    kind: SynthKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix for `.edges`, `.labels`, `.probs.csv` and `.meta`.
    #[arg(long, default_value = "synth")]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = naps::conformal::DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = 50)]
    min_neighborhood: usize,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Node ids to predict (repeatable or comma-separated).
    #[arg(long, required = true, value_delimiter = ',')]
    node: Vec<usize>,
    #[arg(long, default_value = "naps")]
    method: String,
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let data = args.data.load()?;
    let report = run_experiment(&data, &cfg)?;
    io::write_text(&with_ext(&args.out, ".csv"), &report.to_csv())?;
    let table = report.to_table();
    io::write_text(&with_ext(&args.out, ".txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let synthetic = match args.kind {
        SynthKind::Showcase => make_naps_showcase(args.seed)?,
        SynthKind::Exchangeable => make_exchangeable(args.seed)?,
    };
    let metadata = synthetic.metadata.clone();
    let data = Dataset::from_synthetic(synthetic)?;
    let paths = io::write_dataset(&args.out, &data)?;
    let meta_path = DatasetPaths::metadata(&args.out);
    io::write_text(&meta_path, &io::format_key_values(&metadata))?;
    for p in [&paths.edges, &paths.labels, &paths.probs, &meta_path] {
        println!("{}", p.display());
    }
    Ok(())
}

fn summarize(args: SummarizeArgs) -> Result<()> {
    let data = args.data.load()?;
    let summary = summarize_dataset(&data, args.k, args.min_neighborhood);
    println!("{}", DatasetSummary::HEADER);
    println!("{}", summary.to_csv_row());
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let method: Method = args.method.parse()?;
    let data = args.data.load()?;
    let sets = predict_nodes(&data, &cfg, &args.node, method)?;
    println!("node\tthreshold\tlabels");
    for s in sets {
        let labels: Vec<String> = s.labels.iter().map(usize::to_string).collect();
        println!("{}\t{}\t{}", s.node, s.threshold, labels.join(","));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
        Command::Summarize(a) => summarize(a),
        Command::Predict(a) => predict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
