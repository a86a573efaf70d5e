use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{BatchSummary, EvolutionResult, Gene};
use crate::error::{Error, Result};

/// One line of the per-generation CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryCsvRow {
    pub generation: usize,
    pub gene: String,
    pub frequency: usize,
    pub mean_welfare: f64,
    pub welfare_efficiency: f64,
}

/// Columns: generation,gene,frequency,mean_welfare,welfare_efficiency.
/// One row per (generation, configured gene); `frequency` is a head count.
pub fn write_history_csv<W: Write>(result: &EvolutionResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["generation", "gene", "frequency", "mean_welfare", "welfare_efficiency"])?;
    for s in &result.history {
        for (gene, &frequency) in result.genes.iter().zip(&s.gene_frequencies) {
            w.write_record([
                s.generation.to_string(),
                gene.to_string(),
                frequency.to_string(),
                s.mean_welfare.to_string(),
                s.welfare_efficiency.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_history_csv<R: Read>(input: R) -> Result<Vec<HistoryCsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Winner table with one column per summary, named `<game>_n<group size>`.
///
/// Gene rows come first (`pool_tag,attitude,counts...`), in order of first
/// appearance, with 0 where a gene never won or was not configured. Then
/// three summary rows with an empty attitude cell: `threshold_reached`,
/// `average_generations` and `welfare_efficiency` (mean final-generation
/// efficiency as a fraction).
pub fn write_summary_csv<W: Write>(summaries: &[BatchSummary], out: W) -> Result<()> {
    let mut genes: Vec<&Gene> = Vec::new();
    for s in summaries {
        for g in &s.genes {
            if !genes.contains(&g) {
                genes.push(g);
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["pool_tag".to_string(), "attitude".to_string()];
    header.extend(summaries.iter().map(BatchSummary::column_name));
    w.write_record(&header)?;
    for g in genes {
        let mut rec = vec![g.pool_tag.clone(), g.attitude.to_string()];
        for s in summaries {
            let wins = s.genes.iter().position(|x| x == g).map_or(0, |i| s.wins[i]);
            rec.push(wins.to_string());
        }
        w.write_record(&rec)?;
    }
    type Cell = fn(&BatchSummary) -> String;
    let rows: [(&str, Cell); 3] = [
        ("threshold_reached", |s| s.threshold_reached.to_string()),
        ("average_generations", |s| s.average_generations.to_string()),
        ("welfare_efficiency", |s| s.mean_final_efficiency.to_string()),
    ];
    for (name, cell) in rows {
        let mut rec = vec![name.to_string(), String::new()];
        rec.extend(summaries.iter().map(cell));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_json<W: Write>(summaries: &[BatchSummary], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, summaries).map_err(Error::from)
}
