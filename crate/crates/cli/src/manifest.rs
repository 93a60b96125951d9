//! Manifest-driven pipelines: named stages run in order, each writing its
//! artifacts under the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use epitrace::epidemic::{EpidemicNetwork, GeneratorSpec, SiConfig};
use epitrace::gnn::{GnnConfig, TrainConfig};
use epitrace::io::{self, Artifact, Dataset, DatasetManifest, DotOptions, Split};
use epitrace::likelihood::{EstimatorKind, LikelihoodConfig, SourceScores};
use epitrace::metrics::EvalReport;
use epitrace::rng;
use epitrace::trace::{TraceConfig, TraceRun};
use epitrace::Graph;

use crate::error::{usage, CliError, CliResult};
use crate::pipeline::{self, IndexCase, Scorer, SupportKind, Trained};

impl Artifact for Trained {
    const KIND: &'static str = "trained-models";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    #[default]
    Finetuned,
    Pretrained,
}

/// A likelihood estimator, or a model produced by a `train` stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EstimatorSpec {
    Model {
        model: String,
        #[serde(default)]
        phase: Phase,
    },
    Kind(EstimatorKind),
}

fn one() -> usize {
    1
}

fn default_ks() -> Vec<usize> {
    vec![1, 5, 10, 20]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum StageOp {
    Generate {
        spec: GeneratorSpec,
        #[serde(default = "one")]
        count: usize,
    },
    Spread {
        input: String,
        #[serde(default)]
        si: SiConfig,
    },
    Trace {
        input: String,
        trace: TraceConfig,
        estimator: EstimatorSpec,
        #[serde(default)]
        likelihood: LikelihoodConfig,
        #[serde(default)]
        index_case: IndexCase,
    },
    Estimate {
        input: String,
        estimator: EstimatorSpec,
        #[serde(default)]
        likelihood: LikelihoodConfig,
        #[serde(default)]
        support: SupportKind,
    },
    Dataset {
        dataset: DatasetManifest,
    },
    Train {
        dataset: String,
        #[serde(default)]
        gnn: GnnConfig,
        #[serde(default)]
        train: TrainConfig,
    },
    /// Exactly one of: `runs` + `epidemics`; `scores` + `epidemics`;
    /// `scores` + `reference`; `model` + `dataset` (+ `split`).
    Evaluate {
        #[serde(default)]
        runs: Option<String>,
        #[serde(default)]
        scores: Option<String>,
        #[serde(default)]
        reference: Option<String>,
        #[serde(default)]
        epidemics: Option<String>,
        #[serde(default)]
        model: Option<String>,
        #[serde(default)]
        phase: Phase,
        #[serde(default)]
        dataset: Option<String>,
        #[serde(default = "test_split")]
        split: Split,
        #[serde(default = "default_ks")]
        ks: Vec<usize>,
    },
    Export {
        input: String,
        #[serde(default)]
        index: usize,
        #[serde(default)]
        scores: Option<String>,
    },
}

fn test_split() -> Split {
    Split::Test
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    #[serde(flatten)]
    pub op: StageOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub seed: u64,
    /// Output directory; `--out` overrides it.
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Graphs,
    Epidemics,
    Runs,
    Scores,
    Dataset,
    Model,
    Reports,
    Export,
}

impl StageOp {
    fn produces(&self) -> Kind {
        match self {
            StageOp::Generate { .. } => Kind::Graphs,
            StageOp::Spread { .. } => Kind::Epidemics,
            StageOp::Trace { .. } => Kind::Runs,
            StageOp::Estimate { .. } => Kind::Scores,
            StageOp::Dataset { .. } => Kind::Dataset,
            StageOp::Train { .. } => Kind::Model,
            StageOp::Evaluate { .. } => Kind::Reports,
            StageOp::Export { .. } => Kind::Export,
        }
    }

    /// Stage references with the kind each must have.
    fn references(&self) -> Vec<(&str, &[Kind])> {
        let mut out: Vec<(&str, &[Kind])> = Vec::new();
        match self {
            StageOp::Generate { .. } | StageOp::Dataset { .. } => {}
            StageOp::Spread { input, .. } => out.push((input, &[Kind::Graphs])),
            StageOp::Trace { input, estimator, .. } | StageOp::Estimate { input, estimator, .. } => {
                out.push((input, &[Kind::Epidemics]));
                if let EstimatorSpec::Model { model, .. } = estimator {
                    out.push((model, &[Kind::Model]));
                }
            }
            StageOp::Train { dataset, .. } => out.push((dataset, &[Kind::Dataset])),
            StageOp::Evaluate {
                runs,
                scores,
                reference,
                epidemics,
                model,
                dataset,
                ..
            } => {
                let pairs: [(&Option<String>, &[Kind]); 6] = [
                    (runs, &[Kind::Runs]),
                    (scores, &[Kind::Scores]),
                    (reference, &[Kind::Scores]),
                    (epidemics, &[Kind::Epidemics]),
                    (model, &[Kind::Model]),
                    (dataset, &[Kind::Dataset]),
                ];
                out.extend(pairs.iter().filter_map(|(r, k)| r.as_deref().map(|r| (r, *k))));
            }
            StageOp::Export { input, scores, .. } => {
                out.push((input, &[Kind::Graphs, Kind::Epidemics]));
                out.extend(scores.as_deref().map(|s| (s, &[Kind::Scores][..])));
            }
        }
        out
    }

    fn name(&self) -> &'static str {
        match self {
            StageOp::Generate { .. } => "generate",
            StageOp::Spread { .. } => "spread",
            StageOp::Trace { .. } => "trace",
            StageOp::Estimate { .. } => "estimate",
            StageOp::Dataset { .. } => "dataset",
            StageOp::Train { .. } => "train",
            StageOp::Evaluate { .. } => "evaluate",
            StageOp::Export { .. } => "export",
        }
    }
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(io::resolve(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("manifest {}: {e}", path.display())))
    }

    /// Checks names and wiring: every reference names an earlier stage of
    /// the right kind.
    pub fn validate(&self) -> CliResult<()> {
        let mut seen: BTreeMap<&str, Kind> = BTreeMap::new();
        for st in &self.stages {
            if st.name.is_empty() || st.name.contains(['/', '\\']) {
                return usage(format!("bad stage name {:?}", st.name));
            }
            for (r, kinds) in st.op.references() {
                match seen.get(r) {
                    None => return usage(format!("stage {} references {r}, which is not an earlier stage", st.name)),
                    Some(k) if !kinds.contains(k) => {
                        return usage(format!("stage {} cannot use {r} ({k:?}) here", st.name))
                    }
                    _ => {}
                }
            }
            if let StageOp::Evaluate {
                runs,
                scores,
                reference,
                epidemics,
                model,
                dataset,
                ..
            } = &st.op
            {
                let combo = (
                    runs.is_some(),
                    scores.is_some(),
                    reference.is_some(),
                    epidemics.is_some(),
                    model.is_some(),
                    dataset.is_some(),
                );
                let ok = matches!(
                    combo,
                    (true, false, false, true, false, false)
                        | (false, true, false, true, false, false)
                        | (false, true, true, false, false, false)
                        | (false, false, false, false, true, true)
                );
                if !ok {
                    return usage(format!("stage {}: unsupported evaluate inputs", st.name));
                }
            }
            if seen.insert(&st.name, st.op.produces()).is_some() {
                return usage(format!("duplicate stage name {}", st.name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum Produced {
    Graphs(Vec<Graph>),
    Epidemics(Vec<EpidemicNetwork>),
    Runs(Vec<TraceRun>),
    Scores(Vec<SourceScores<f64>>),
    Dataset(Box<Dataset>),
    Model(Box<Trained>),
    Reports(Vec<EvalReport>),
    Export(String),
}

/// Results of a pipeline run, by stage name, and the run log text.
pub struct RunOutput {
    pub artifacts: BTreeMap<String, Produced>,
    pub log: String,
}

struct Ctx<'a> {
    done: &'a BTreeMap<String, Produced>,
}

impl Ctx<'_> {
    fn get(&self, name: &str) -> &Produced {
        self.done.get(name).expect("validated reference")
    }

    fn epidemics(&self, name: &str) -> &[EpidemicNetwork] {
        match self.get(name) {
            Produced::Epidemics(e) => e,
            _ => unreachable!("validated kind"),
        }
    }

    fn scores(&self, name: &str) -> &[SourceScores<f64>] {
        match self.get(name) {
            Produced::Scores(s) => s,
            _ => unreachable!("validated kind"),
        }
    }

    fn model(&self, name: &str, phase: Phase) -> &epitrace::gnn::GnnModel<f64> {
        match self.get(name) {
            Produced::Model(t) => match phase {
                Phase::Finetuned => &t.finetuned,
                Phase::Pretrained => &t.pretrained,
            },
            _ => unreachable!("validated kind"),
        }
    }

    fn scorer(&self, e: &EstimatorSpec, likelihood: LikelihoodConfig) -> Scorer {
        match e {
            EstimatorSpec::Kind(k) => Scorer::likelihood(*k, likelihood),
            EstimatorSpec::Model { model, phase } => Scorer::Gnn {
                model: self.model(model, *phase).clone(),
                config: likelihood,
            },
        }
    }
}

fn run_stage(op: &StageOp, seed: u64, ctx: &Ctx, config: &Value) -> CliResult<Produced> {
    Ok(match op {
        StageOp::Generate { spec, count } => Produced::Graphs(pipeline::generate_graphs(spec, *count, seed)?),
        StageOp::Spread { input, si } => {
            let Produced::Graphs(g) = ctx.get(input) else {
                unreachable!("validated kind")
            };
            Produced::Epidemics(pipeline::spread(g, si, seed)?)
        }
        StageOp::Trace {
            input,
            trace,
            estimator,
            likelihood,
            index_case,
        } => Produced::Runs(pipeline::trace(
            ctx.epidemics(input),
            trace,
            &ctx.scorer(estimator, *likelihood),
            *index_case,
            seed,
        )?),
        StageOp::Estimate {
            input,
            estimator,
            likelihood,
            support,
        } => Produced::Scores(pipeline::estimate(
            ctx.epidemics(input),
            *support,
            &ctx.scorer(estimator, *likelihood),
            seed,
        )?),
        StageOp::Dataset { dataset } => {
            let m = DatasetManifest {
                seed: rng::derive(seed, &[dataset.seed]),
                ..dataset.clone()
            };
            Produced::Dataset(Box::new(io::build_dataset(&m)?))
        }
        StageOp::Train { dataset, gnn, train } => {
            let Produced::Dataset(d) = ctx.get(dataset) else {
                unreachable!("validated kind")
            };
            Produced::Model(Box::new(pipeline::train_two_phase(d, *gnn, train, seed)?))
        }
        StageOp::Evaluate {
            runs,
            scores,
            reference,
            epidemics,
            model,
            phase,
            dataset,
            split,
            ks,
        } => {
            let cfg = config.clone();
            let reports = match (runs, scores, reference, epidemics, model, dataset) {
                (Some(r), _, _, Some(e), _, _) => {
                    let Produced::Runs(runs) = ctx.get(r) else {
                        unreachable!("validated kind")
                    };
                    pipeline::evaluate_runs(runs, ctx.epidemics(e), cfg)?
                }
                (_, Some(s), None, Some(e), _, _) => {
                    vec![pipeline::evaluate_scores(ctx.scores(s), ctx.epidemics(e), ks, cfg)?]
                }
                (_, Some(s), Some(r), _, _, _) => {
                    vec![pipeline::evaluate_bias(ctx.scores(s), ctx.scores(r), cfg)?]
                }
                (_, _, _, _, Some(m), Some(d)) => {
                    let Produced::Dataset(d) = ctx.get(d) else {
                        unreachable!("validated kind")
                    };
                    pipeline::evaluate_model(ctx.model(m, *phase), d.items(*split), ks, cfg)?
                }
                _ => unreachable!("validated combination"),
            };
            Produced::Reports(reports)
        }
        StageOp::Export { input, index, scores } => {
            let (g, source, faded) = match ctx.get(input) {
                Produced::Graphs(gs) => (gs.get(*index).cloned(), None, Vec::new()),
                Produced::Epidemics(es) => match es.get(*index) {
                    Some(e) => (Some(e.network()), Some(e.source()), crate::app::uninfected(e)),
                    None => (None, None, Vec::new()),
                },
                _ => unreachable!("validated kind"),
            };
            let Some(g) = g else {
                return usage(format!("export index {index} out of range"));
            };
            let mut opts = DotOptions {
                source,
                faded,
                ..Default::default()
            };
            if let Some(s) = scores {
                let table = ctx
                    .scores(s)
                    .get(*index)
                    .ok_or_else(|| CliError::Usage(format!("no score table {index}")))?;
                opts.scores = Some(dense_scores(table, g.node_count()));
                opts.estimate = table.argmax.first().copied();
            }
            Produced::Export(io::to_dot(&g, &opts))
        }
    })
}

/// Scores indexed by node id; unscored nodes get NaN and print as such.
pub fn dense_scores(table: &SourceScores<f64>, n: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; n];
    for (l, s) in table.labels.iter().zip(&table.scores) {
        if l.index() < n {
            out[l.index()] = *s;
        }
    }
    out
}

fn write_output(dir: &Path, name: &str, p: &Produced, config: &Value) -> CliResult<Vec<PathBuf>> {
    let file = |ext: &str| dir.join(format!("{name}{ext}"));
    let mut written = vec![file(".json")];
    match p {
        Produced::Graphs(x) => io::save(file(".json"), x, config)?,
        Produced::Epidemics(x) => io::save(file(".json"), x, config)?,
        Produced::Runs(x) => io::save(file(".json"), x, config)?,
        Produced::Scores(x) => io::save(file(".json"), x, config)?,
        Produced::Dataset(x) => io::save(file(".json"), x.as_ref(), config)?,
        Produced::Model(x) => {
            io::save(file(".json"), x.as_ref(), config)?;
            io::save(file(".model.json"), &x.finetuned, config)?;
            written.push(file(".model.json"));
        }
        Produced::Reports(x) => {
            io::save(file(".json"), x, config)?;
            for r in x {
                let path = file(&format!(".{}.csv", r.metric));
                r.write_csv(std::fs::File::create(&path)?)?;
                written.push(path);
            }
        }
        Produced::Export(dot) => {
            written = vec![file(".dot")];
            std::fs::write(file(".dot"), dot)?;
        }
    }
    Ok(written)
}

fn summary(p: &Produced) -> String {
    match p {
        Produced::Graphs(x) => format!("{} graphs", x.len()),
        Produced::Epidemics(x) => format!("{} outbreaks", x.len()),
        Produced::Runs(x) => format!("{} trace runs", x.len()),
        Produced::Scores(x) => format!("{} score tables", x.len()),
        Produced::Dataset(d) => format!(
            "dataset {}/{}/{}/{} graphs, {} substitutions",
            d.pretrain.len(),
            d.finetune.len(),
            d.test.len(),
            d.validation.len(),
            d.substitutions.len()
        ),
        Produced::Model(t) => format!(
            "model, final losses {:?} / {:?}",
            t.pretrain_log.train_loss.last(),
            t.finetune_log.train_loss.last()
        ),
        Produced::Reports(rs) => rs
            .iter()
            .map(|r| format!("{} {:?}", r.metric, r.values))
            .collect::<Vec<_>>()
            .join("; "),
        Produced::Export(s) => format!("{} bytes of DOT", s.len()),
    }
}

/// Validates then runs every stage in order. With `out`, artifacts and a
/// `run.log` are written there.
pub fn run(m: &ExperimentManifest, out: Option<&Path>) -> CliResult<RunOutput> {
    m.validate()?;
    let mut done: BTreeMap<String, Produced> = BTreeMap::new();
    let mut log = String::new();
    let _ = writeln!(log, "seed {}", m.seed);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    for (i, st) in m.stages.iter().enumerate() {
        let seed = rng::derive(m.seed, &[i as u64]);
        let config = json!({"seed": m.seed, "stage": st, "stage_seed": seed});
        let produced = run_stage(&st.op, seed, &Ctx { done: &done }, &config)?;
        let _ = writeln!(log, "stage {} ({}) seed {seed}: {}", st.name, st.op.name(), summary(&produced));
        let _ = writeln!(log, "  config {}", serde_json::to_string(&st)?);
        if let Some(dir) = out {
            for p in write_output(dir, &st.name, &produced, &config)? {
                let _ = writeln!(log, "  wrote {}", p.file_name().unwrap_or_default().to_string_lossy());
            }
        }
        done.insert(st.name.clone(), produced);
    }
    if let Some(dir) = out {
        std::fs::write(dir.join("run.log"), &log)?;
    }
    Ok(RunOutput { artifacts: done, log })
}
