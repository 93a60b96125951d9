//! Labeled training/evaluation sets built from a manifest.

use std::sync::Arc;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epidemic::{generate_reported, random_source, simulate_si, Family, GeneratorSpec, SiConfig};
use crate::error::{Error, Result};
use crate::gnn::LabeledGraph;
use crate::graph::NodeId;
use crate::likelihood::{
    constant_tree_log_probability, score_support, tree_log_counts, DegreeUniverse, EstimatorKind,
    LikelihoodConfig, SamplingRule, DEFAULT_CAP,
};
use crate::rng::{self, stream};
use crate::support::Support;

const MAX_SHRINKS: usize = 20;

/// How node labels (log likelihoods) are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Annotator {
    /// Sampled average permutation probability times the permutation count.
    Sampled {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        rule: SamplingRule,
    },
    Exact {
        #[serde(default = "default_cap")]
        cap: usize,
    },
    /// Log permutation count, plus the shared per-permutation log
    /// probability under a constant-degree universe. Trees only.
    RegularTreeCentrality,
}

fn default_samples() -> usize {
    100
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

impl Annotator {
    pub fn name(&self) -> &'static str {
        match self {
            Annotator::Sampled { .. } => "sampled",
            Annotator::Exact { .. } => "exact",
            Annotator::RegularTreeCentrality => "regular-tree-centrality",
        }
    }

    /// One label per local node of `support`.
    pub fn annotate(&self, support: &Support, cfg: &LikelihoodConfig, seed: u64) -> Result<Vec<f64>> {
        match *self {
            Annotator::Sampled { samples, rule } => {
                let kind = EstimatorKind::Rsavr { samples, rule };
                Ok(score_support::<f64>(support, &kind, cfg, seed, DEFAULT_CAP)?.scores)
            }
            Annotator::Exact { cap } => {
                Ok(score_support::<f64>(support, &EstimatorKind::Exact, cfg, seed, cap)?.scores)
            }
            Annotator::RegularTreeCentrality => {
                let g = support.graph();
                if !g.is_tree() {
                    return Err(Error::NotATree);
                }
                let shared = match cfg.universe {
                    DegreeUniverse::Constant(d) => {
                        cfg.degrees(support)?;
                        constant_tree_log_probability::<f64>(g.node_count(), d)
                    }
                    _ => 0.0,
                };
                Ok(tree_log_counts::<f64>(g)?.into_iter().map(|c| c + shared).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub count: usize,
    /// Graph `i` uses `generators[i % len]`.
    pub generators: Vec<Family>,
    pub min_size: usize,
    pub max_size: usize,
    pub annotator: Annotator,
}

impl SplitSpec {
    fn validate(&self, name: &str) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(format!("{name} split: {m}")));
        if self.count == 0 {
            return bad("count must be positive".into());
        }
        if self.generators.is_empty() {
            return bad("no generators".into());
        }
        if self.min_size < 2 || self.min_size > self.max_size {
            return bad(format!("size range {}..={}", self.min_size, self.max_size));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Pretrain,
    Finetune,
    Test,
    Validation,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Pretrain, Split::Finetune, Split::Test, Split::Validation];

    fn index(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    /// Spreading settings; the per-graph seed replaces `si.seed`.
    pub si: SiConfig,
    pub likelihood: LikelihoodConfig,
    pub pretrain: SplitSpec,
    pub finetune: SplitSpec,
    pub test: SplitSpec,
    #[serde(default)]
    pub validation: Option<SplitSpec>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        self.si.validate()?;
        self.pretrain.validate("pretrain")?;
        self.finetune.validate("finetune")?;
        self.test.validate("test")?;
        if let Some(v) = &self.validation {
            v.validate("validation")?;
        }
        Ok(())
    }

    pub fn split(&self, s: Split) -> Option<&SplitSpec> {
        match s {
            Split::Pretrain => Some(&self.pretrain),
            Split::Finetune => Some(&self.finetune),
            Split::Test => Some(&self.test),
            Split::Validation => self.validation.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetItem {
    pub spec: GeneratorSpec,
    /// True source, as a node of the generated graph.
    pub source: NodeId,
    pub graph: LabeledGraph,
}

/// A graph regenerated smaller because its labels were infeasible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub split: Split,
    pub index: usize,
    pub requested: usize,
    pub used: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub pretrain: Vec<DatasetItem>,
    pub finetune: Vec<DatasetItem>,
    pub test: Vec<DatasetItem>,
    pub validation: Vec<DatasetItem>,
    pub substitutions: Vec<Substitution>,
}

impl Dataset {
    pub fn items(&self, s: Split) -> &[DatasetItem] {
        match s {
            Split::Pretrain => &self.pretrain,
            Split::Finetune => &self.finetune,
            Split::Test => &self.test,
            Split::Validation => &self.validation,
        }
    }

    pub fn graphs(&self, s: Split) -> Vec<LabeledGraph> {
        self.items(s).iter().map(|it| it.graph.clone()).collect()
    }
}

/// Nearest valid size for families with size constraints.
fn snap(family: &Family, n: usize) -> usize {
    match *family {
        Family::RandomRegularTree { degree } if degree >= 2 && n > 2 => {
            let step = degree - 1;
            let k = ((n - 2) as f64 / step as f64).round().max(1.0) as usize;
            2 + k * step
        }
        _ => n,
    }
}

fn infeasible(e: &Error) -> bool {
    matches!(e, Error::EnumerationCap { .. })
        || matches!(e, Error::InvalidConfig(m) if m.starts_with("exact evaluation handles"))
}

fn build_item(
    m: &DatasetManifest,
    split: Split,
    spec: &SplitSpec,
    index: usize,
) -> Result<(DatasetItem, Option<Substitution>)> {
    let path = [stream::DATASET, split.index(), index as u64];
    let mut r = rng::rng(m.seed, &path);
    let family = spec.generators[index % spec.generators.len()].clone();
    let requested = snap(&family, r.gen_range(spec.min_size..=spec.max_size));
    let mut size = requested;
    let mut last_err = None;
    for shrink in 0..=MAX_SHRINKS {
        let seed = rng::derive(m.seed, &[path[0], path[1], path[2], shrink as u64]);
        let gspec = GeneratorSpec::new(family.clone(), size, seed);
        let (g, _) = generate_reported(&gspec)?;
        let source = random_source(&g, seed)?;
        let si = SiConfig { seed, ..m.si };
        let epi = simulate_si(Arc::new(g), source, &si)?;
        let support = Support::full(&epi);
        match spec.annotator.annotate(&support, &m.likelihood, seed) {
            Ok(labels) => {
                let provenance = format!(
                    "{split:?}/{index} family={} n={size} labels={}",
                    serde_json::to_value(&family)?["family"].as_str().unwrap_or("?"),
                    spec.annotator.name()
                );
                let sub = (size != requested).then(|| Substitution {
                    split,
                    index,
                    requested,
                    used: size,
                    reason: last_err.take().map(|e: Error| e.to_string()).unwrap_or_default(),
                });
                let graph = LabeledGraph::new(support, labels, provenance)?;
                return Ok((DatasetItem { spec: gspec, source, graph }, sub));
            }
            Err(e) if infeasible(&e) => {
                let smaller = snap(&family, (size * 4 / 5).max(2));
                if smaller >= size {
                    return Err(e);
                }
                size = smaller;
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::EmptyInstances))
}

/// Builds every split; each graph depends only on `(seed, split, index)`.
pub fn build_dataset(m: &DatasetManifest) -> Result<Dataset> {
    m.validate()?;
    let mut out = Dataset {
        manifest: m.clone(),
        pretrain: Vec::new(),
        finetune: Vec::new(),
        test: Vec::new(),
        validation: Vec::new(),
        substitutions: Vec::new(),
    };
    for split in Split::ALL {
        let Some(spec) = m.split(split) else {
            continue;
        };
        let built: Vec<(DatasetItem, Option<Substitution>)> = (0..spec.count)
            .into_par_iter()
            .map(|i| build_item(m, split, spec, i))
            .collect::<Result<_>>()?;
        let mut items = Vec::with_capacity(built.len());
        for (item, sub) in built {
            items.push(item);
            out.substitutions.extend(sub);
        }
        match split {
            Split::Pretrain => out.pretrain = items,
            Split::Finetune => out.finetune = items,
            Split::Test => out.test = items,
            Split::Validation => out.validation = items,
        }
    }
    Ok(out)
}
