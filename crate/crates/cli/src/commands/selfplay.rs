use dilemma_core::selfplay::{run_mix_grid, write_grid_csv, MixGridConfig};

use super::{json_bytes, out_dir, render};
use crate::config::{load, load_pools, SelfplayConfig};
use crate::{CliError, CliResult, Common};

pub fn run(common: &Common, k: Option<f64>) -> CliResult<()> {
    let loaded = load::<SelfplayConfig>(common.config.as_deref())?;
    let mut cfg = loaded.config;
    if let Some(k) = k {
        cfg.params.k = k;
    }
    let seed = common.seed.unwrap_or(cfg.seed);
    let smallest = *cfg
        .group_sizes
        .iter()
        .min()
        .ok_or_else(|| CliError::Config("group_sizes is empty".into()))?;
    let gates = [(cfg.game, cfg.params.for_size(smallest))];
    let (mut pools, admission) = load_pools(
        &[&cfg.pool_e, &cfg.pool_c],
        &loaded.base,
        seed,
        cfg.admission.as_ref(),
        &gates,
        cfg.exec,
    )?;
    let pool_c = pools.pop().expect("two pools");
    let pool_e = pools.pop().expect("two pools");

    let grid = MixGridConfig {
        params: cfg.params.clone(),
        group_sizes: cfg.group_sizes.clone(),
        samples_per_cell: cfg.samples_per_cell,
        exec: cfg.exec,
        ..MixGridConfig::new(cfg.game, pool_e, pool_c, seed)
    };
    let rows = run_mix_grid(&grid)?;

    let mut out = out_dir(common, "selfplay")?;
    if let Some(path) = &common.config {
        out.record_config(path, &loaded.bytes, seed);
    }
    out.write("grid.csv", &render(|w| write_grid_csv(&rows, w))?)?;
    if !admission.is_empty() {
        out.write("admission.json", &json_bytes(&admission)?)?;
    }
    out.finish()?;
    Ok(())
}
