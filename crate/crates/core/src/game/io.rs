use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Action, GameResult};
use crate::error::Result;

/// One line of the per-round CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundCsvRow {
    pub round: usize,
    pub player: usize,
    pub action: Action,
    pub payoff: f64,
    pub stock_before: Option<f64>,
    pub stock_after: Option<f64>,
}

/// Columns: round,player,action,payoff,stock_before,stock_after.
/// Stock cells are empty outside the Common Pool.
pub fn write_rounds_csv<W: Write>(result: &GameResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["round", "player", "action", "payoff", "stock_before", "stock_after"])?;
    let cell = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for (t, record) in result.rounds.iter().enumerate() {
        for (i, (a, p)) in record.actions.iter().zip(&record.payoffs).enumerate() {
            let action = if a.is_cooperate() { "C" } else { "D" };
            w.write_record([
                t.to_string(),
                i.to_string(),
                action.to_string(),
                p.to_string(),
                cell(record.stock_before),
                cell(record.stock_after),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_rounds_csv<R: Read>(input: R) -> Result<Vec<RoundCsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
