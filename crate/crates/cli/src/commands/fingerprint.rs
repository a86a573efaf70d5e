use dilemma_core::fingerprint::{
    cohens_d, fingerprint_all, mpd, participation_ratio, pca, set_eigenvalues, write_matrix_csv,
    write_projections_csv, FingerprintSet, FingerprintSpec,
};
use dilemma_core::strategy::{make_reference, Reference};
use dilemma_core::{seed, Strategy, StrategyPool};

use super::{json_bytes, out_dir, render};
use crate::config::{load, load_pools, FingerprintConfig};
use crate::{CliError, CliResult, Common};

pub const REFERENCE_SET: &str = "reference";

fn cell(value: dilemma_core::Result<f64>) -> String {
    value.map_or_else(|_| "undefined".to_string(), |v| v.to_string())
}

/// Per pool: MPD, Cohen's d against the pool with the same tag and the other
/// attitude, and participation ratio.
fn metric_cells(set: &FingerprintSet, pools: &[StrategyPool]) -> Vec<[String; 3]> {
    pools
        .iter()
        .map(|p| {
            let own = set.vectors_of(&p.name());
            let partner = pools
                .iter()
                .find(|q| q.gene_tag == p.gene_tag && q.attitude != p.attitude);
            let d = match partner {
                Some(q) => cell(cohens_d(&own, &set.vectors_of(&q.name()))),
                None => "undefined".to_string(),
            };
            let pr = set_eigenvalues(&own).and_then(|l| participation_ratio(&l));
            [cell(mpd(&own)), d, cell(pr)]
        })
        .collect()
}

pub fn run(common: &Common) -> CliResult<()> {
    let loaded = load::<FingerprintConfig>(common.config.as_deref())?;
    let cfg = loaded.config;
    let seed = common.seed.unwrap_or(cfg.seed);
    if cfg.games.is_empty() || cfg.pools.is_empty() {
        return Err(CliError::Config("games and pools must be non-empty".into()));
    }
    let params = cfg.game_params();
    let gates: Vec<_> = cfg.games.iter().map(|&g| (g, params.clone())).collect();
    for (g, p) in &gates {
        p.validate(*g)?;
    }
    let sources: Vec<_> = cfg.pools.iter().collect();
    let (pools, admission) = load_pools(
        &sources,
        &loaded.base,
        seed,
        cfg.admission.as_ref(),
        &gates,
        cfg.exec,
    )?;
    for (i, p) in pools.iter().enumerate() {
        if pools[..i].iter().any(|q| q.name() == p.name()) {
            return Err(CliError::Config(format!("pool {} listed twice", p.name())));
        }
    }
    let references: Vec<Strategy> = if cfg.references {
        Reference::default_set(params.n)
            .into_iter()
            .map(|r| make_reference(r, params.n))
            .collect::<dilemma_core::Result<_>>()?
    } else {
        Vec::new()
    };
    let names: Vec<String> = pools.iter().map(StrategyPool::name).collect();
    let mut entries: Vec<(&str, &Strategy)> = Vec::new();
    for (p, name) in pools.iter().zip(&names) {
        entries.extend(p.members.iter().map(|s| (name.as_str(), s)));
    }
    entries.extend(references.iter().map(|s| (REFERENCE_SET, s)));

    let mut out = out_dir(common, "fingerprint")?;
    if let Some(path) = &common.config {
        out.record_config(path, &loaded.bytes, seed);
    }
    let mut header = vec!["pool_tag".to_string(), "attitude".to_string()];
    let mut table: Vec<Vec<String>> = pools
        .iter()
        .map(|p| vec![p.gene_tag.clone(), p.attitude.to_string()])
        .collect();
    for (gi, &game) in cfg.games.iter().enumerate() {
        let spec = FingerprintSpec {
            kind: game,
            params: params.clone(),
            rollouts: cfg.rollouts,
            exec: cfg.exec,
        };
        let set = fingerprint_all(&entries, &spec, seed::derive(seed, &[gi as u64]))?;
        let vectors: Vec<Vec<f64>> = set.rows.iter().map(|r| r.vector.values.clone()).collect();
        let fit = pca(&vectors)?;
        let g = game.short_name();
        out.write(&format!("fingerprints_{g}.csv"), &render(|w| write_matrix_csv(&set, w))?)?;
        out.write(
            &format!("projections_{g}.csv"),
            &render(|w| write_projections_csv(&set, &fit, w))?,
        )?;
        let nodes: Vec<String> = set.nodes.iter().map(|n| n.key()).collect();
        let body = serde_json::json!({ "game": game, "nodes": nodes, "pca": fit });
        out.write(&format!("pca_{g}.json"), &json_bytes(&body)?)?;

        header.extend(["mpd", "d", "pr"].map(|m| format!("{g}_{m}")));
        for (row, cells) in table.iter_mut().zip(metric_cells(&set, &pools)) {
            row.extend(cells);
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(dilemma_core::Error::from)?;
    for row in &table {
        w.write_record(row).map_err(dilemma_core::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    out.write("metrics.csv", &bytes)?;
    if !admission.is_empty() {
        out.write("admission.json", &json_bytes(&admission)?)?;
    }
    out.finish()?;
    Ok(())
}
