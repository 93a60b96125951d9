//! Command-line front end.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use epitrace::epidemic::{EpidemicNetwork, Family, FrontierRule, GeneratorSpec, SiConfig};
use epitrace::gnn::{Aggregator, GnnConfig, GnnModel, Optimizer, TrainConfig};
use epitrace::io::{self, Artifact, Dataset, DatasetManifest, DotOptions, Split};
use epitrace::likelihood::{
    DegreeUniverse, EstimatorKind, LikelihoodConfig, ProbabilityMode, SamplingRule, SourceScores,
};
use epitrace::metrics::EvalReport;
use epitrace::trace::{TieRule, TraceConfig, TraceRun, TraceStrategy};
use epitrace::{Graph, Support};

use crate::error::{usage, CliError, CliResult};
use crate::manifest::{dense_scores, ExperimentManifest};
use crate::pipeline::{self, IndexCase, Scorer, SupportKind};

#[derive(Parser, Debug)]
#[command(name = "epitrace", version, about = "Epidemic source inference over contact-tracing networks")]
pub struct Cli {
    /// Root seed; every random stream derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file (directory for `run`); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit graphs from a generator spec.
    Generate(GenerateArgs),
    /// Run SI spreading over graphs.
    Spread(SpreadArgs),
    /// Forward tracing with a per-stage estimator.
    Trace(TraceArgs),
    /// Score every node of each outbreak (or a cluster file).
    Estimate(EstimateArgs),
    /// Two-phase training from a dataset manifest.
    Train(TrainArgs),
    /// Metrics over runs, scores, or a model.
    Evaluate(EvaluateArgs),
    /// DOT or JSON export of one graph.
    Export(ExportArgs),
    /// Run a whole pipeline manifest.
    Run(RunArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FamilyArg {
    ErdosRenyi,
    BarabasiAlbert,
    WattsStrogatz,
    RandomRegularTree,
    CompleteNaryTree,
    RandomTree,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// GeneratorSpec JSON file; overrides the family flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, default_value_t = 100)]
    pub size: usize,
    #[arg(long, default_value_t = 0.03)]
    pub p: f64,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, default_value_t = 2)]
    pub arity: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FrontierArg {
    EdgeUniform,
    NodeUniform,
}

#[derive(Args, Debug)]
pub struct SpreadArgs {
    /// Graph list from `generate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub stop_fraction: f64,
    #[arg(long, value_enum, default_value = "edge-uniform")]
    pub frontier: FrontierArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorArg {
    Exact,
    RumorCentrality,
    Centroid,
    Rsavr,
    Bfsran,
    Degmax,
    Degmin,
    Degran,
    Gnn,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum RuleArg {
    EdgeUniform,
    NodeUniform,
    UniformTree,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum UniverseArg {
    TracingNetwork,
    ObservedContacts,
    EpidemicNetwork,
    Constant,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ModeArg {
    Literal,
    ExactBoundary,
}

#[derive(Args, Debug)]
pub struct ScorerArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub estimator: EstimatorArg,
    /// Permutation samples per node (rsavr, degmax, degmin).
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "edge-uniform")]
    pub rule: RuleArg,
    #[arg(long, value_enum, default_value = "observed-contacts")]
    pub universe: UniverseArg,
    /// Degree of the constant universe.
    #[arg(long, default_value_t = 4)]
    pub universe_degree: u32,
    #[arg(long, value_enum, default_value = "exact-boundary")]
    pub mode: ModeArg,
    /// Enumeration and subset-state cap.
    #[arg(long, default_value_t = epitrace::likelihood::DEFAULT_CAP)]
    pub cap: usize,
    /// Model file (a `gnn-model` or `trained-models` artifact) for `gnn`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum StrategyArg {
    Bfs,
    Dfs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum TieArg {
    LowestId,
    HighestId,
    PreferPrevious,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum IndexArg {
    Random,
    Source,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    /// Outbreak list from `spread`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "bfs")]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 1)]
    pub skip: usize,
    #[arg(long, value_enum, default_value = "lowest-id")]
    pub tie_rule: TieArg,
    #[arg(long, value_enum, default_value = "random")]
    pub index_case: IndexArg,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SupportArg {
    Full,
    InfectionTree,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Outbreak list from `spread`.
    #[arg(long, conflicts_with = "cluster", required_unless_present = "cluster")]
    pub input: Option<PathBuf>,
    /// Cluster file; its contact graph is scored as observed.
    #[arg(long)]
    pub cluster: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full")]
    pub support: SupportArg,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum AggregatorArg {
    Mean,
    Sum,
    Max,
    Lstm,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// DatasetManifest JSON.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    #[arg(long, value_enum, default_value = "mean")]
    pub aggregator: AggregatorArg,
    #[arg(long, default_value_t = 150)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, value_enum, default_value = "adam")]
    pub optimizer: OptimizerArg,
    /// Shuffle graph order each epoch.
    #[arg(long)]
    pub shuffle: bool,
    /// Also write the built dataset here.
    #[arg(long)]
    pub dataset_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SplitArg {
    Pretrain,
    Finetune,
    Test,
    Validation,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub runs: Option<PathBuf>,
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Reference score list for bias.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub epidemics: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Dataset artifact (from `train --dataset-out`).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,20")]
    pub ks: Vec<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: ReportFormat,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Graph list or outbreak list.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Score list whose entry `index` annotates the nodes.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dot")]
    pub format: ExportFormat,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

impl ScorerArgs {
    fn likelihood(&self) -> LikelihoodConfig {
        let universe = match self.universe {
            UniverseArg::TracingNetwork => DegreeUniverse::TracingNetwork,
            UniverseArg::ObservedContacts => DegreeUniverse::ObservedContacts,
            UniverseArg::EpidemicNetwork => DegreeUniverse::EpidemicNetwork,
            UniverseArg::Constant => DegreeUniverse::Constant(self.universe_degree),
        };
        let mode = match self.mode {
            ModeArg::Literal => ProbabilityMode::Literal,
            ModeArg::ExactBoundary => ProbabilityMode::Boundary,
        };
        LikelihoodConfig::new(universe, mode)
    }

    fn scorer(&self) -> CliResult<Scorer> {
        let rule = match self.rule {
            RuleArg::EdgeUniform => SamplingRule::EdgeUniform,
            RuleArg::NodeUniform => SamplingRule::NodeUniform,
            RuleArg::UniformTree => SamplingRule::UniformTree,
        };
        let samples = self.samples;
        let kind = match self.estimator {
            EstimatorArg::Exact => EstimatorKind::Exact,
            EstimatorArg::RumorCentrality => EstimatorKind::RumorCentrality,
            EstimatorArg::Centroid => EstimatorKind::Centroid,
            EstimatorArg::Rsavr => EstimatorKind::Rsavr { samples, rule },
            EstimatorArg::Bfsran => EstimatorKind::Bfsran,
            EstimatorArg::Degmax => EstimatorKind::DegMax { samples },
            EstimatorArg::Degmin => EstimatorKind::DegMin { samples },
            EstimatorArg::Degran => EstimatorKind::DegRan,
            EstimatorArg::Gnn => {
                let Some(path) = &self.model else {
                    return usage("--estimator gnn needs --model");
                };
                return Ok(Scorer::Gnn {
                    model: load_model(path)?,
                    config: self.likelihood(),
                });
            }
        };
        Ok(Scorer::Likelihood {
            kind,
            config: self.likelihood(),
            cap: self.cap,
        })
    }

    fn echo(&self) -> Value {
        json!({
            "estimator": format!("{:?}", self.estimator),
            "samples": self.samples,
            "rule": format!("{:?}", self.rule),
            "likelihood": self.likelihood(),
            "cap": self.cap,
            "model": self.model,
        })
    }
}

/// Accepts a bare model or the fine-tuned half of a training artifact.
fn load_model(path: &Path) -> CliResult<GnnModel<f64>> {
    match io::load::<GnnModel<f64>>(path) {
        Ok(m) => Ok(m),
        Err(epitrace::Error::KindMismatch { .. }) => Ok(io::load::<pipeline::Trained>(path)?.finetuned),
        Err(e) => Err(e.into()),
    }
}

fn emit<T: Artifact>(out: Option<&Path>, x: &T, config: &Value) -> CliResult<()> {
    match out {
        Some(p) => io::save(p, x, config)?,
        None => std::io::stdout().write_all(&io::to_json_bytes(x, config)?)?,
    }
    Ok(())
}

fn emit_text(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn generate(cli: &Cli, a: &GenerateArgs) -> CliResult<()> {
    let spec = match (&a.spec, a.family) {
        (Some(p), _) => serde_json::from_str::<GeneratorSpec>(&std::fs::read_to_string(io::resolve(p))?)
            .map_err(|e| CliError::Usage(format!("spec {}: {e}", p.display())))?,
        (None, Some(f)) => {
            let family = match f {
                FamilyArg::ErdosRenyi => Family::ErdosRenyi { p: a.p },
                FamilyArg::BarabasiAlbert => Family::BarabasiAlbert { m: a.m },
                FamilyArg::WattsStrogatz => Family::WattsStrogatz { k: a.k, beta: a.beta },
                FamilyArg::RandomRegularTree => Family::RandomRegularTree { degree: a.degree },
                FamilyArg::CompleteNaryTree => Family::CompleteNaryTree { arity: a.arity },
                FamilyArg::RandomTree => Family::RandomTree,
            };
            GeneratorSpec::new(family, a.size, 0)
        }
        (None, None) => return usage("generate needs --spec or --family"),
    };
    let graphs = pipeline::generate_graphs(&spec, a.count, cli.seed)?;
    emit(cli.out.as_deref(), &graphs, &json!({"spec": spec, "count": a.count, "seed": cli.seed}))
}

fn spread(cli: &Cli, a: &SpreadArgs) -> CliResult<()> {
    let graphs: Vec<Graph> = io::load(&a.input)?;
    let si = SiConfig {
        stop_fraction: a.stop_fraction,
        frontier_rule: match a.frontier {
            FrontierArg::EdgeUniform => FrontierRule::EdgeUniform,
            FrontierArg::NodeUniform => FrontierRule::NodeUniform,
        },
        seed: 0,
    };
    let out = pipeline::spread(&graphs, &si, cli.seed)?;
    emit(cli.out.as_deref(), &out, &json!({"si": si, "seed": cli.seed, "input": a.input}))
}

fn trace(cli: &Cli, a: &TraceArgs) -> CliResult<()> {
    let epis: Vec<EpidemicNetwork> = io::load(&a.input)?;
    let cfg = TraceConfig {
        strategy: match a.strategy {
            StrategyArg::Bfs => TraceStrategy::Bfs,
            StrategyArg::Dfs => TraceStrategy::Dfs,
        },
        skip_interval: a.skip,
        tie_rule: match a.tie_rule {
            TieArg::LowestId => TieRule::LowestId,
            TieArg::HighestId => TieRule::HighestId,
            TieArg::PreferPrevious => TieRule::PreferPrevious,
        },
    };
    let index = match a.index_case {
        IndexArg::Random => IndexCase::Random,
        IndexArg::Source => IndexCase::Source,
    };
    let runs = pipeline::trace(&epis, &cfg, &a.scorer.scorer()?, index, cli.seed)?;
    let config = json!({"trace": cfg, "index_case": index, "scorer": a.scorer.echo(), "seed": cli.seed, "input": a.input});
    emit(cli.out.as_deref(), &runs, &config)
}

fn estimate(cli: &Cli, a: &EstimateArgs) -> CliResult<()> {
    let scorer = a.scorer.scorer()?;
    let config = json!({"scorer": a.scorer.echo(), "seed": cli.seed, "input": a.input, "cluster": a.cluster});
    let tables = if let Some(c) = &a.cluster {
        let rec = io::read_cluster(c)?;
        let support: Support = rec.support()?;
        vec![scorer.score(&support, pipeline::instance_seed(cli.seed, 0))?]
    } else {
        let epis: Vec<EpidemicNetwork> = io::load(a.input.as_ref().expect("clap requires one input"))?;
        let kind = match a.support {
            SupportArg::Full => SupportKind::Full,
            SupportArg::InfectionTree => SupportKind::InfectionTree,
        };
        pipeline::estimate(&epis, kind, &scorer, cli.seed)?
    };
    emit(cli.out.as_deref(), &tables, &config)
}

fn train(cli: &Cli, a: &TrainArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(io::resolve(&a.manifest))?;
    let m: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("manifest: {e}")))?;
    let data = io::build_dataset(&m)?;
    let gnn = GnnConfig {
        layers: a.layers,
        hidden: a.hidden,
        aggregator: match a.aggregator {
            AggregatorArg::Mean => Aggregator::Mean,
            AggregatorArg::Sum => Aggregator::Sum,
            AggregatorArg::Max => Aggregator::Max,
            AggregatorArg::Lstm => Aggregator::Lstm,
        },
    };
    let tc = TrainConfig {
        epochs: a.epochs,
        optimizer: match a.optimizer {
            OptimizerArg::Adam => Optimizer::Adam {
                lr: a.lr,
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
            },
            OptimizerArg::Sgd => Optimizer::Sgd { lr: a.lr },
        },
        shuffle: a.shuffle,
        ..TrainConfig::default()
    };
    let trained = pipeline::train_two_phase(&data, gnn, &tc, cli.seed)?;
    let config = json!({"dataset": m, "gnn": gnn, "train": tc, "seed": cli.seed});
    if let Some(p) = &a.dataset_out {
        io::save(p, &data, &config)?;
    }
    emit(cli.out.as_deref(), &trained, &config)
}

fn evaluate(cli: &Cli, a: &EvaluateArgs) -> CliResult<()> {
    let config = json!({"runs": a.runs, "scores": a.scores, "reference": a.reference, "epidemics": a.epidemics,
        "model": a.model, "dataset": a.dataset, "split": format!("{:?}", a.split), "ks": a.ks});
    let reports: Vec<EvalReport> = match (&a.runs, &a.scores, &a.reference, &a.epidemics, &a.model, &a.dataset) {
        (Some(r), None, None, Some(e), None, None) => {
            let runs: Vec<TraceRun> = io::load(r)?;
            pipeline::evaluate_runs(&runs, &io::load::<Vec<EpidemicNetwork>>(e)?, config.clone())?
        }
        (None, Some(s), None, Some(e), None, None) => {
            let s: Vec<SourceScores<f64>> = io::load(s)?;
            vec![pipeline::evaluate_scores(&s, &io::load::<Vec<EpidemicNetwork>>(e)?, &a.ks, config.clone())?]
        }
        (None, Some(s), Some(r), None, None, None) => {
            let s: Vec<SourceScores<f64>> = io::load(s)?;
            vec![pipeline::evaluate_bias(&s, &io::load::<Vec<SourceScores<f64>>>(r)?, config.clone())?]
        }
        (None, None, None, None, Some(m), Some(d)) => {
            let data: Dataset = io::load(d)?;
            let split = match a.split {
                SplitArg::Pretrain => Split::Pretrain,
                SplitArg::Finetune => Split::Finetune,
                SplitArg::Test => Split::Test,
                SplitArg::Validation => Split::Validation,
            };
            pipeline::evaluate_model(&load_model(m)?, data.items(split), &a.ks, config.clone())?
        }
        _ => {
            return usage(
                "evaluate takes --runs with --epidemics, --scores with --epidemics, \
                 --scores with --reference, or --model with --dataset",
            )
        }
    };
    match a.format {
        ReportFormat::Json => emit(cli.out.as_deref(), &reports, &config),
        ReportFormat::Csv => {
            let mut buf = Vec::new();
            for r in &reports {
                r.write_csv(&mut buf)?;
            }
            emit_text(cli.out.as_deref(), &String::from_utf8_lossy(&buf))
        }
    }
}

fn export(cli: &Cli, a: &ExportArgs) -> CliResult<()> {
    let (g, source, faded) = match io::load::<Vec<Graph>>(&a.input) {
        Ok(gs) => (gs.into_iter().nth(a.index), None, Vec::new()),
        Err(epitrace::Error::KindMismatch { .. }) => {
            let es: Vec<EpidemicNetwork> = io::load(&a.input)?;
            match es.get(a.index) {
                Some(e) => (Some(e.network()), Some(e.source()), uninfected(e)),
                None => (None, None, Vec::new()),
            }
        }
        Err(e) => return Err(e.into()),
    };
    let Some(g) = g else {
        return usage(format!("index {} out of range", a.index));
    };
    match a.format {
        ExportFormat::Json => emit(cli.out.as_deref(), &g, &json!({"input": a.input, "index": a.index})),
        ExportFormat::Dot => {
            let mut opts = DotOptions {
                source,
                faded,
                ..Default::default()
            };
            if let Some(s) = &a.scores {
                let tables: Vec<SourceScores<f64>> = io::load(s)?;
                let t = tables
                    .get(a.index)
                    .ok_or_else(|| CliError::Usage(format!("no score table {}", a.index)))?;
                opts.scores = Some(dense_scores(t, g.node_count()));
                opts.estimate = t.argmax.first().copied();
            }
            emit_text(cli.out.as_deref(), &io::to_dot(&g, &opts))
        }
    }
}

pub(crate) fn uninfected(e: &EpidemicNetwork) -> Vec<epitrace::NodeId> {
    e.base().nodes().filter(|&v| !e.is_infected(v)).collect()
}

fn run(cli: &Cli, a: &RunArgs) -> CliResult<()> {
    let mut m = ExperimentManifest::load(&a.manifest)?;
    if cli.seed != 0 {
        m.seed = cli.seed;
    }
    let out = cli.out.clone().or_else(|| m.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let r = crate::manifest::run(&m, Some(&out))?;
    eprint!("{}", r.log);
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return usage("--jobs must be positive");
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match &cli.command {
        Command::Generate(a) => generate(cli, a),
        Command::Spread(a) => spread(cli, a),
        Command::Trace(a) => trace(cli, a),
        Command::Estimate(a) => estimate(cli, a),
        Command::Train(a) => train(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::Export(a) => export(cli, a),
        Command::Run(a) => run(cli, a),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
