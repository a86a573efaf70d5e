use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{Attitude, Origin, PolicySpec, Strategy};
use crate::error::{Error, Result};
use crate::seed::StreamRng;

pub const POLICY_SCHEMA_VERSION: u32 = 1;

/// A tagged collection of strategies produced under one attitude.
#[derive(Clone, Debug)]
pub struct StrategyPool {
    pub gene_tag: String,
    pub attitude: Attitude,
    pub members: Vec<Strategy>,
}

impl StrategyPool {
    pub fn new(gene_tag: impl Into<String>, attitude: Attitude, members: Vec<Strategy>) -> Result<Self> {
        let gene_tag = gene_tag.into();
        if members.is_empty() {
            return Err(Error::params(format!("pool `{gene_tag}` has no members")));
        }
        Ok(StrategyPool {
            gene_tag,
            attitude,
            members,
        })
    }

    /// A pool of `size` copies of one strategy.
    pub fn uniform(gene_tag: impl Into<String>, attitude: Attitude, strategy: Strategy, size: usize) -> Result<Self> {
        Self::new(gene_tag, attitude, vec![strategy; size])
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn name(&self) -> String {
        format!("{}/{}", self.gene_tag, self.attitude)
    }

    /// `count` distinct member indices, uniformly at random.
    pub fn sample_distinct(&self, count: usize, rng: &mut StreamRng) -> Result<Vec<usize>> {
        if count > self.len() {
            return Err(Error::PoolTooSmall {
                pool: self.name(),
                available: self.len(),
                requested: count,
            });
        }
        Ok(index::sample(rng, self.len(), count).into_vec())
    }
}

/// On-disk policy pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub schema_version: u32,
    pub gene_tag: String,
    pub attitude: Attitude,
    pub members: Vec<PolicySpec>,
}

impl PolicyFile {
    pub fn into_pool(self) -> Result<StrategyPool> {
        if self.schema_version != POLICY_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                expected: POLICY_SCHEMA_VERSION,
            });
        }
        if self.members.is_empty() {
            return Err(Error::params("members list is empty"));
        }
        let members = self
            .members
            .into_iter()
            .enumerate()
            .map(|(i, spec)| {
                spec.check()
                    .map_err(|m| Error::params(format!("members[{i}]: {m}")))?;
                Ok(Strategy::new(spec.label.clone(), Origin::File, Box::new(spec)))
            })
            .collect::<Result<Vec<_>>>()?;
        StrategyPool::new(self.gene_tag, self.attitude, members)
    }
}

/// Parses a policy file body. Errors carry the JSON path and line/column.
pub fn parse_pool(text: &str) -> Result<StrategyPool> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: PolicyFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::params(format!(
            "at `{path}` (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    file.into_pool()
}

pub fn load_pool(path: impl AsRef<Path>) -> Result<StrategyPool> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::PolicyFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_pool(&text).map_err(|e| match e {
        Error::SchemaVersion { .. } => e,
        other => Error::PolicyFile {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}
