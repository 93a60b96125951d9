//! Persistence for every artifact, plus dataset building and cluster files.
//!
//! JSON artifacts are wrapped in a versioned envelope:
//!
//! ```text
//! {"config": .., "format": "epitrace", "kind": "graph", "payload": .., "sha256": "..", "version": 1}
//! ```
//!
//! Keys are sorted at every level and the checksum covers the canonical
//! compact encoding of `[kind, config, payload]`, so saving what was loaded
//! reproduces the file byte for byte.

mod binary;
mod cluster;
mod dataset;
mod dot;

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub use binary::{read_graph_binary, write_graph_binary};
pub use cluster::{fixture_19, fixture_23, read_cluster, write_cluster, ClusterRecord};
pub use dataset::{
    build_dataset, Annotator, Dataset, DatasetItem, DatasetManifest, Split, SplitSpec, Substitution,
};
pub use dot::{to_dot, DotOptions};

use crate::epidemic::EpidemicNetwork;
use crate::error::{Error, Result};
use crate::gnn::{GnnModel, LabeledGraph};
use crate::graph::Graph;
use crate::likelihood::SourceScores;
use crate::metrics::EvalReport;
use crate::scalar::Scalar;
use crate::trace::TraceRun;

pub const FORMAT: &str = "epitrace";
pub const VERSION: u32 = 1;

/// Environment variable naming the data root for relative input paths.
pub const DATA_ENV: &str = "EPITRACE_DATA";

/// A type stored in the JSON envelope under a fixed kind tag.
pub trait Artifact: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

impl Artifact for Graph {
    const KIND: &'static str = "graph";
}
impl Artifact for EpidemicNetwork {
    const KIND: &'static str = "epidemic-network";
}
impl Artifact for TraceRun {
    const KIND: &'static str = "trace-run";
}
impl<S: Scalar> Artifact for SourceScores<S> {
    const KIND: &'static str = "source-scores";
}
impl<S: Scalar> Artifact for GnnModel<S> {
    const KIND: &'static str = "gnn-model";
}
impl Artifact for EvalReport {
    const KIND: &'static str = "eval-report";
}
impl Artifact for Dataset {
    const KIND: &'static str = "dataset";
}
impl Artifact for Vec<LabeledGraph> {
    const KIND: &'static str = "labeled-graphs";
}
impl Artifact for Vec<EpidemicNetwork> {
    const KIND: &'static str = "epidemic-networks";
}
impl Artifact for Vec<Graph> {
    const KIND: &'static str = "graphs";
}
impl Artifact for Vec<TraceRun> {
    const KIND: &'static str = "trace-runs";
}
impl<S: Scalar> Artifact for Vec<SourceScores<S>> {
    const KIND: &'static str = "source-scores-list";
}
impl Artifact for Vec<EvalReport> {
    const KIND: &'static str = "eval-reports";
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    kind: String,
    config: Value,
    sha256: String,
    payload: Value,
}

fn checksum(kind: &str, config: &Value, payload: &Value) -> Result<String> {
    let body = serde_json::to_vec(&(kind, config, payload))?;
    Ok(hex::encode(Sha256::digest(&body)))
}

fn canonical<T: Serialize>(x: &T) -> Result<Value> {
    // serde_json's map type is ordered, so converting through Value sorts keys
    Ok(serde_json::to_value(x)?)
}

/// Canonical envelope bytes for `x` with its generating `config`.
pub fn to_json_bytes<T: Artifact>(x: &T, config: &Value) -> Result<Vec<u8>> {
    let payload = canonical(x)?;
    let config = canonical(config)?;
    let env = Envelope {
        format: FORMAT.into(),
        version: VERSION,
        kind: T::KIND.into(),
        sha256: checksum(T::KIND, &config, &payload)?,
        config,
        payload,
    };
    let mut out = serde_json::to_vec_pretty(&canonical(&env)?)?;
    out.push(b'\n');
    Ok(out)
}

/// Parses and verifies an envelope, returning the artifact and its config.
pub fn from_json_bytes<T: Artifact>(bytes: &[u8]) -> Result<(T, Value)> {
    let env: Envelope =
        serde_json::from_slice(bytes).map_err(|e| Error::Corrupt(format!("envelope: {e}")))?;
    if env.format != FORMAT {
        return Err(Error::Corrupt(format!("unknown format tag {:?}", env.format)));
    }
    if env.version != VERSION {
        return Err(Error::VersionMismatch {
            expected: VERSION,
            found: env.version,
        });
    }
    if env.kind != T::KIND {
        return Err(Error::KindMismatch {
            expected: T::KIND.into(),
            found: env.kind,
        });
    }
    let computed = checksum(&env.kind, &env.config, &env.payload)?;
    if computed != env.sha256 {
        return Err(Error::Checksum {
            expected: env.sha256,
            computed,
        });
    }
    let x = serde_json::from_value(env.payload)
        .map_err(|e| Error::Corrupt(format!("{} payload: {e}", T::KIND)))?;
    Ok((x, env.config))
}

pub fn save<T: Artifact>(path: impl AsRef<Path>, x: &T, config: &Value) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, to_json_bytes(x, config)?)?;
    Ok(())
}

pub fn load<T: Artifact>(path: impl AsRef<Path>) -> Result<T> {
    load_with_config(path).map(|(x, _)| x)
}

pub fn load_with_config<T: Artifact>(path: impl AsRef<Path>) -> Result<(T, Value)> {
    from_json_bytes(&std::fs::read(resolve(path.as_ref()))?)
}

/// The data root named by `EPITRACE_DATA`, if set.
pub fn data_root() -> Option<PathBuf> {
    std::env::var_os(DATA_ENV).map(PathBuf::from)
}

/// `path` itself if it exists or is absolute, else `path` under the data root.
pub fn resolve(path: &Path) -> PathBuf {
    if path.is_absolute() || path.exists() {
        return path.to_path_buf();
    }
    match data_root() {
        Some(root) => root.join(path),
        None => path.to_path_buf(),
    }
}
