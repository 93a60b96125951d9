//! Compact little-endian graph encoding.
//!
//! `b"EPTG"`, version `u32`, node count `u32`, edge count `u64`, then each
//! edge as two `u32` (smaller endpoint first, ascending), then the SHA-256
//! of everything before it.

use sha2::{Digest, Sha256};

use super::VERSION;
use crate::error::{Error, Result};
use crate::graph::Graph;

const MAGIC: &[u8; 4] = b"EPTG";
const HEADER: usize = 4 + 4 + 4 + 8;

pub fn write_graph_binary(g: &Graph) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 8 * g.edge_count() + 32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.node_count() as u32).to_le_bytes());
    out.extend_from_slice(&(g.edge_count() as u64).to_le_bytes());
    for (u, v) in g.edges() {
        out.extend_from_slice(&u.0.to_le_bytes());
        out.extend_from_slice(&v.0.to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

pub fn read_graph_binary(bytes: &[u8]) -> Result<Graph> {
    if bytes.len() < HEADER + 32 || &bytes[..4] != MAGIC {
        return Err(Error::Corrupt("not a binary graph".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::VersionMismatch {
            expected: VERSION,
            found: version,
        });
    }
    let n = u32_at(bytes, 8) as usize;
    let m = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let body = (m as usize)
        .checked_mul(8)
        .and_then(|x| x.checked_add(HEADER))
        .filter(|&len| len + 32 == bytes.len())
        .ok_or_else(|| Error::Corrupt(format!("length does not match {m} edges")))?;
    let computed = hex::encode(Sha256::digest(&bytes[..body]));
    let expected = hex::encode(&bytes[body..]);
    if computed != expected {
        return Err(Error::Checksum { expected, computed });
    }
    let edges: Vec<(u32, u32)> = (0..m as usize)
        .map(|i| (u32_at(bytes, HEADER + 8 * i), u32_at(bytes, HEADER + 8 * i + 4)))
        .collect();
    Graph::with_node_count(n, &edges)
}
