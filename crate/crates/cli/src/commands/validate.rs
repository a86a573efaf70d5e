use std::path::Path;

use dilemma_core::strategy::{admit_pool, load_pool};
use dilemma_core::{Exec, GameKind, GameParams};

use super::{json_bytes, out_dir};
use crate::{CliError, CliResult, Common};

pub fn run(
    common: &Common,
    pool_path: &Path,
    game: GameKind,
    n: usize,
    rounds: usize,
    trials: usize,
) -> CliResult<()> {
    let params = GameParams::new(n).with_rounds(rounds);
    params.validate(game)?;
    let pool = load_pool(pool_path)?;
    let seed = common.seed.unwrap_or(0);
    let gate = admit_pool(&pool, game, &params, trials, seed, Exec::default())?;

    let mut out = out_dir(common, "validate")?;
    let body = serde_json::json!({
        "pool": pool.name(),
        "game": game,
        "params": params,
        "seed": seed,
        "reports": gate.reports,
    });
    out.write("validation.json", &json_bytes(&body)?)?;
    out.finish()?;

    for r in &gate.reports {
        println!("{}\t{}", if r.passed { "ok" } else { "rejected" }, r.label);
    }
    if gate.rejected.is_empty() {
        return Ok(());
    }
    let labels: Vec<&str> = gate
        .rejected
        .iter()
        .map(|&i| pool.members[i].label.as_str())
        .collect();
    Err(CliError::Fault(format!(
        "{} of {} members rejected: {}",
        labels.len(),
        pool.len(),
        labels.join(", ")
    )))
}
