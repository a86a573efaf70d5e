use dilemma_core::game::welfare_bounds;
use dilemma_core::{GameKind, GameParams};

use super::{json_bytes, out_dir};
use crate::{CliResult, Common};

#[allow(clippy::too_many_arguments)]
pub fn run(
    common: &Common,
    name: &str,
    game: GameKind,
    n: usize,
    k: Option<f64>,
    m: Option<usize>,
    rounds: usize,
    capacity: Option<f64>,
) -> CliResult<()> {
    let mut params = GameParams::new(n).with_rounds(rounds);
    if let Some(k) = k {
        params.k = k;
    }
    if let Some(m) = m {
        params.m = m;
    }
    if let Some(c) = capacity {
        params.capacity = c;
    }
    let b = welfare_bounds(game, &params)?;
    println!("min {}", b.min);
    println!("max {}", b.max);
    if b.approximate {
        println!("approximate true");
    }
    if common.out.is_some() {
        let mut out = out_dir(common, name)?;
        let body = serde_json::json!({ "game": game, "params": params, "bounds": b });
        out.write("bounds.json", &json_bytes(&body)?)?;
        out.finish()?;
    }
    Ok(())
}
