//! Mix-grid experiment: mean welfare of groups holding `n_e` members of an
//! exploitative pool and `n - n_e` members of a collective pool.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::game::{play_game, welfare_bounds, GameKind, ParamsTemplate, WelfareBounds};
use crate::seed;
use crate::strategy::{Strategy, StrategyPool};

pub const DEFAULT_GROUP_SIZES: [usize; 4] = [4, 16, 64, 256];
pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Clone, Debug)]
pub struct MixGridConfig {
    pub kind: GameKind,
    pub params: ParamsTemplate,
    pub group_sizes: Vec<usize>,
    pub samples_per_cell: usize,
    pub pool_e: StrategyPool,
    pub pool_c: StrategyPool,
    pub master_seed: u64,
    pub exec: Exec,
}

impl MixGridConfig {
    pub fn new(kind: GameKind, pool_e: StrategyPool, pool_c: StrategyPool, master_seed: u64) -> Self {
        MixGridConfig {
            kind,
            params: ParamsTemplate::default(),
            group_sizes: DEFAULT_GROUP_SIZES.to_vec(),
            samples_per_cell: DEFAULT_SAMPLES,
            pool_e,
            pool_c,
            master_seed,
            exec: Exec::default(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.samples_per_cell == 0 {
            return Err(Error::params("samples_per_cell must be >= 1"));
        }
        if self.group_sizes.is_empty() {
            return Err(Error::params("group_sizes is empty"));
        }
        for &n in &self.group_sizes {
            self.params.for_size(n).validate(self.kind)?;
            for pool in [&self.pool_e, &self.pool_c] {
                if pool.len() < n {
                    return Err(Error::PoolTooSmall {
                        pool: pool.name(),
                        available: pool.len(),
                        requested: n,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixGridRow {
    pub game: GameKind,
    pub n: usize,
    pub n_e: usize,
    pub n_c: usize,
    pub mean_welfare: f64,
    /// Sample standard deviation over `sqrt(samples)`; zero for one sample.
    pub std_error: f64,
    pub welfare_min: f64,
    pub welfare_max: f64,
    pub samples: usize,
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Welfare of one freshly drawn group.
fn sample_welfare(config: &MixGridConfig, n: usize, n_e: usize, sample: usize) -> Result<f64> {
    let s = seed::derive(
        config.master_seed,
        &[seed::TAG_SAMPLE, n as u64, n_e as u64, sample as u64],
    );
    let mut rng = seed::stream(s, &[]);
    let mut group: Vec<&Strategy> = Vec::with_capacity(n);
    for i in config.pool_e.sample_distinct(n_e, &mut rng)? {
        group.push(&config.pool_e.members[i]);
    }
    for i in config.pool_c.sample_distinct(n - n_e, &mut rng)? {
        group.push(&config.pool_c.members[i]);
    }
    group.shuffle(&mut rng);
    let params = config.params.for_size(n);
    let result = play_game(config.kind, &params, &group, seed::derive(s, &[seed::TAG_GAME]))?;
    Ok(result.mean_welfare)
}

/// Rows ordered by group size, then `n_e` ascending. Each (cell, sample)
/// pair has its own derived seed, so the result does not depend on `exec`.
pub fn run_mix_grid(config: &MixGridConfig) -> Result<Vec<MixGridRow>> {
    config.check()?;
    let bounds: Vec<WelfareBounds> = config
        .group_sizes
        .iter()
        .map(|&n| welfare_bounds(config.kind, &config.params.for_size(n)))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize, usize)> = config
        .group_sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &n)| (0..=n).map(move |n_e| (g, n, n_e)))
        .collect();
    let per = config.samples_per_cell;
    let welfare = config.exec.try_map(cells.len() * per, |task| {
        let (_, n, n_e) = cells[task / per];
        sample_welfare(config, n, n_e, task % per)
    })?;
    Ok(cells
        .iter()
        .zip(welfare.chunks(per))
        .map(|(&(g, n, n_e), xs)| {
            let (mean_welfare, std_error) = mean_and_se(xs);
            MixGridRow {
                game: config.kind,
                n,
                n_e,
                n_c: n - n_e,
                mean_welfare,
                std_error,
                welfare_min: bounds[g].min,
                welfare_max: bounds[g].max,
                samples: per,
            }
        })
        .collect())
}

const GRID_HEADER: [&str; 8] = [
    "game",
    "n",
    "n_e",
    "mean_welfare",
    "std_error",
    "welfare_min",
    "welfare_max",
    "samples",
];

/// Columns: game,n,n_e,mean_welfare,std_error,welfare_min,welfare_max,samples.
/// `n_c` is implied by `n - n_e`.
pub fn write_grid_csv<W: Write>(rows: &[MixGridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_HEADER)?;
    for r in rows {
        w.write_record([
            r.game.short_name().to_string(),
            r.n.to_string(),
            r.n_e.to_string(),
            r.mean_welfare.to_string(),
            r.std_error.to_string(),
            r.welfare_min.to_string(),
            r.welfare_max.to_string(),
            r.samples.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_grid_csv(rows: &[MixGridRow], path: impl AsRef<std::path::Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_grid_csv(rows, std::io::BufWriter::new(file))
}

pub fn read_grid_csv<R: Read>(input: R) -> Result<Vec<MixGridRow>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(GRID_HEADER) {
        return Err(Error::params("unexpected mix-grid CSV header"));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |i: usize| Error::params(format!("bad {} `{}`", GRID_HEADER[i], field(i)));
        let int = |i: usize| field(i).parse::<usize>().map_err(|_| bad(i));
        let real = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let n = int(1)?;
        let n_e = int(2)?;
        if n_e > n {
            return Err(bad(2));
        }
        rows.push(MixGridRow {
            game: field(0).parse().map_err(|_| bad(0))?,
            n,
            n_e,
            n_c: n - n_e,
            mean_welfare: real(3)?,
            std_error: real(4)?,
            welfare_min: real(5)?,
            welfare_max: real(6)?,
            samples: int(7)?,
        });
    }
    Ok(rows)
}
