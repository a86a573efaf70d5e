use std::path::{Path, PathBuf};

use dilemma_core::game::GameKind;
use dilemma_core::seed;
use dilemma_core::strategy::{admit_pool, load_pool, synth_pool, FamilyConfig, StrategyPool};
use dilemma_core::{Exec, GameParams, ParamsTemplate};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Where a pool comes from. Relative paths resolve against the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolSource {
    File(PathBuf),
    Synth { size: usize, family: FamilyConfig },
}

impl PoolSource {
    /// Synthesised pools draw from `derive(master_seed, [pool tag, index])`.
    pub fn load(&self, base: &Path, master_seed: u64, index: usize) -> CliResult<StrategyPool> {
        Ok(match self {
            PoolSource::File(p) => load_pool(base.join(p))?,
            PoolSource::Synth { size, family } => synth_pool(
                family,
                *size,
                seed::derive(master_seed, &[seed::TAG_POOL, index as u64]),
            )?,
        })
    }
}

/// Optional admission gate applied to every pool before a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissionConfig {
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerprintConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default)]
    pub exec: Exec,
    #[serde(default = "all_games")]
    pub games: Vec<GameKind>,
    #[serde(default = "four")]
    pub n_players: usize,
    #[serde(default = "five")]
    pub rounds: usize,
    #[serde(default = "fifty")]
    pub rollouts: usize,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub capacity: Option<f64>,
    /// Adds the reference strategies to the PCA as set `reference`.
    #[serde(default = "yes")]
    pub references: bool,
    pub pools: Vec<PoolSource>,
    #[serde(default)]
    pub admission: Option<AdmissionConfig>,
}

impl FingerprintConfig {
    pub fn game_params(&self) -> GameParams {
        let mut p = GameParams::new(self.n_players).with_rounds(self.rounds);
        if let Some(k) = self.k {
            p.k = k;
        }
        if let Some(m) = self.m {
            p.m = m;
        }
        if let Some(c) = self.capacity {
            p.capacity = c;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfplayConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default)]
    pub exec: Exec,
    pub game: GameKind,
    #[serde(default)]
    pub params: ParamsTemplate,
    #[serde(default = "paper_group_sizes")]
    pub group_sizes: Vec<usize>,
    #[serde(default = "two_hundred")]
    pub samples_per_cell: usize,
    pub pool_e: PoolSource,
    pub pool_c: PoolSource,
    #[serde(default)]
    pub admission: Option<AdmissionConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default)]
    pub exec: Exec,
    #[serde(default = "all_games")]
    pub games: Vec<GameKind>,
    #[serde(default = "evolution_group_sizes")]
    pub group_sizes: Vec<usize>,
    #[serde(default)]
    pub params: ParamsTemplate,
    #[serde(default = "population")]
    pub population: usize,
    #[serde(default = "four")]
    pub games_per_agent: usize,
    #[serde(default = "elites")]
    pub elites: usize,
    #[serde(default = "mutation_rate")]
    pub mutation_rate: f64,
    #[serde(default = "yes")]
    pub mutation_excludes_current: bool,
    #[serde(default = "dominance")]
    pub dominance_threshold: f64,
    #[serde(default = "two_hundred")]
    pub max_generations: usize,
    #[serde(default = "hundred")]
    pub runs: usize,
    /// Runs per column whose per-generation history is written.
    #[serde(default = "one")]
    pub history_runs: usize,
    pub pools: Vec<PoolSource>,
    #[serde(default)]
    pub admission: Option<AdmissionConfig>,
}

fn all_games() -> Vec<GameKind> {
    GameKind::ALL.to_vec()
}
fn paper_group_sizes() -> Vec<usize> {
    vec![4, 16, 64, 256]
}
fn evolution_group_sizes() -> Vec<usize> {
    vec![4, 64]
}
fn one() -> usize {
    1
}
fn four() -> usize {
    4
}
fn five() -> usize {
    5
}
fn fifty() -> usize {
    50
}
fn elites() -> usize {
    64
}
fn hundred() -> usize {
    100
}
fn two_hundred() -> usize {
    200
}
fn population() -> usize {
    512
}
fn mutation_rate() -> f64 {
    0.10
}
fn dominance() -> f64 {
    0.75
}
fn yes() -> bool {
    true
}

/// A parsed config with its raw bytes (for the manifest digest) and the
/// directory relative paths resolve against.
pub struct Loaded<T> {
    pub config: T,
    pub bytes: Vec<u8>,
    pub base: PathBuf,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u32>,
}

pub fn load<T: DeserializeOwned>(path: Option<&Path>) -> CliResult<Loaded<T>> {
    let path = path.ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let probe: VersionProbe = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    match probe.schema_version {
        Some(CONFIG_SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(CliError::Config(format!(
                "{}: unsupported schema_version {v} (expected {CONFIG_SCHEMA_VERSION})",
                path.display()
            )))
        }
        None => return Err(CliError::Config(format!("{}: missing schema_version", path.display()))),
    }
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    let config = serde_path_to_error::deserialize(de).map_err(|e| {
        CliError::Config(format!("{}: at `{}`: {}", path.display(), e.path(), e.inner()))
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, bytes, base })
}

/// Loads every pool and, if configured, drops members that fail admission
/// in any of `gates`. A pool left empty is a strategy fault.
pub fn load_pools(
    sources: &[&PoolSource],
    base: &Path,
    master_seed: u64,
    admission: Option<&AdmissionConfig>,
    gates: &[(GameKind, GameParams)],
    exec: Exec,
) -> CliResult<(Vec<StrategyPool>, Vec<serde_json::Value>)> {
    let mut pools = Vec::with_capacity(sources.len());
    let mut reports = Vec::new();
    for (i, src) in sources.iter().enumerate() {
        let mut pool = src.load(base, master_seed, i)?;
        let Some(adm) = admission else {
            pools.push(pool);
            continue;
        };
        for (kind, params) in gates {
            let gate = admit_pool(
                &pool,
                *kind,
                params,
                adm.trials,
                seed::derive(master_seed, &[seed::TAG_VALIDATE, i as u64]),
                exec,
            )?;
            let rejected: Vec<&str> = gate.rejected.iter().map(|&r| pool.members[r].label.as_str()).collect();
            reports.push(serde_json::json!({
                "pool": pool.name(),
                "game": kind.short_name(),
                "n": params.n,
                "members": pool.len(),
                "rejected": rejected,
            }));
            pool = gate.admitted.ok_or_else(|| {
                CliError::Fault(format!("every member of pool {} failed admission in {kind}", pool.name()))
            })?;
        }
        pools.push(pool);
    }
    Ok((pools, reports))
}
