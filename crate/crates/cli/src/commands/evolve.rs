use dilemma_core::evolution::{
    batch_runs, write_history_csv, write_summary_csv, write_summary_json, EvolutionConfig, Gene,
    GeneRegistry,
};
use dilemma_core::seed;

use super::{out_dir, render};
use crate::config::{load, load_pools, EvolveConfig};
use crate::{CliError, CliResult, Common};

pub fn run(common: &Common, k: Option<f64>) -> CliResult<()> {
    let loaded = load::<EvolveConfig>(common.config.as_deref())?;
    let mut cfg = loaded.config;
    if let Some(k) = k {
        cfg.params.k = k;
    }
    let seed = common.seed.unwrap_or(cfg.seed);
    if cfg.games.is_empty() || cfg.group_sizes.is_empty() || cfg.pools.is_empty() {
        return Err(CliError::Config("games, group_sizes and pools must be non-empty".into()));
    }
    let smallest = *cfg.group_sizes.iter().min().expect("non-empty");
    let gates: Vec<_> = cfg.games.iter().map(|&g| (g, cfg.params.for_size(smallest))).collect();
    let sources: Vec<_> = cfg.pools.iter().collect();
    let (pools, admission) = load_pools(
        &sources,
        &loaded.base,
        seed,
        cfg.admission.as_ref(),
        &gates,
        cfg.exec,
    )?;
    let genes: Vec<Gene> = pools.iter().map(Gene::of_pool).collect();
    let registry = GeneRegistry::new(pools)?;

    let mut out = out_dir(common, "evolve")?;
    if let Some(path) = &common.config {
        out.record_config(path, &loaded.bytes, seed);
    }
    let mut summaries = Vec::new();
    for (gi, &game) in cfg.games.iter().enumerate() {
        for (si, &size) in cfg.group_sizes.iter().enumerate() {
            let ec = EvolutionConfig {
                params: cfg.params.clone(),
                population: cfg.population,
                games_per_agent: cfg.games_per_agent,
                elites: cfg.elites,
                mutation_rate: cfg.mutation_rate,
                mutation_excludes_current: cfg.mutation_excludes_current,
                dominance_threshold: cfg.dominance_threshold,
                max_generations: cfg.max_generations,
                exec: cfg.exec,
                ..EvolutionConfig::new(
                    game,
                    genes.clone(),
                    size,
                    seed::derive(seed, &[gi as u64, si as u64]),
                )
            };
            let (summary, results) = batch_runs(&ec, &registry, cfg.runs)?;
            for (r, result) in results.iter().take(cfg.history_runs).enumerate() {
                let name = format!("history_{}_n{size}_run{r}.csv", game.short_name());
                out.write(&name, &render(|w| write_history_csv(result, w))?)?;
            }
            eprintln!(
                "{}: {} runs, {} reached the threshold",
                summary.column_name(),
                summary.runs,
                summary.threshold_reached
            );
            summaries.push(summary);
        }
    }
    out.write("summary.csv", &render(|w| write_summary_csv(&summaries, w))?)?;
    out.write("summary.json", &render(|w| write_summary_json(&summaries, &mut *w))?)?;
    if !admission.is_empty() {
        out.write("admission.json", &super::json_bytes(&admission)?)?;
    }
    out.finish()?;
    Ok(())
}
