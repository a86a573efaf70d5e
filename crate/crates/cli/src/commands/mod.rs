pub mod bounds;
pub mod evolve;
pub mod fingerprint;
pub mod selfplay;
pub mod validate;

use std::path::PathBuf;

use crate::manifest::OutputDir;
use crate::{CliResult, Common};

pub fn out_dir(common: &Common, command: &str) -> CliResult<OutputDir> {
    let root = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(command));
    OutputDir::create(root, command, common.threads)
}

/// Renders a table writer into memory so the manifest can hash it.
pub fn render<F>(f: F) -> CliResult<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> dilemma_core::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn json_bytes<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(dilemma_core::Error::from)?;
    buf.push(b'\n');
    Ok(buf)
}
