//! Binary checkpoint: magic, format version, a JSON manifest (config echo and
//! named shapes), then each block as little-endian `f64`s in manifest order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{manifest, BlockSpec, ParamBlock, PolicyConfig, PolicyParams};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MSANCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    config: PolicyConfig,
    blocks: Vec<BlockSpec>,
}

pub fn encode_checkpoint(params: &PolicyParams) -> Vec<u8> {
    let header = Manifest {
        format_version: CHECKPOINT_VERSION,
        config: *params.config(),
        blocks: params.blocks().iter().map(|b| b.spec.clone()).collect(),
    };
    let json = serde_json::to_vec(&header).expect("manifest serializes");
    let mut out = Vec::with_capacity(20 + json.len() + params.num_values() * 8);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for block in params.blocks() {
        for v in &block.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Checkpoint(format!("truncated while reading {what}")));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

pub fn decode_checkpoint(mut bytes: &[u8]) -> Result<PolicyParams> {
    let cursor = &mut bytes;
    if take(cursor, 8, "magic")? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(cursor, 4, "version")?.try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let len = u64::from_le_bytes(take(cursor, 8, "manifest length")?.try_into().expect("8 bytes"));
    let json = take(cursor, len as usize, "manifest")?;
    let header: Manifest =
        serde_json::from_slice(json).map_err(|e| Error::Checkpoint(format!("manifest: {e}")))?;
    if header.format_version != version {
        return Err(Error::Checkpoint("manifest version disagrees with header".into()));
    }
    header.config.validate()?;
    let expected = manifest(&header.config);
    if header.blocks != expected {
        return Err(Error::Checkpoint(
            "shape list does not match the configuration it echoes".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(expected.len());
    for spec in expected {
        let raw = take(cursor, spec.len() * 8, &spec.name)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        blocks.push(ParamBlock { spec, values });
    }
    if !cursor.is_empty() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", cursor.len())));
    }
    PolicyParams::from_blocks(header.config, blocks)
}

pub fn save_checkpoint(params: &PolicyParams, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(params)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<PolicyParams> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
