use std::io::{Read, Write};

use super::{DecisionNode, FeatureVector, FingerprintRow, FingerprintSet, PcaResult};
use crate::error::{Error, Result};

/// Columns: `label,set`, then one column per node key in canonical order.
pub fn write_matrix_csv<W: Write>(set: &FingerprintSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string(), "set".to_string()];
    header.extend(set.nodes.iter().map(DecisionNode::key));
    w.write_record(&header)?;
    for row in &set.rows {
        let mut rec = vec![row.label.clone(), row.set.clone()];
        rec.extend(row.vector.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_key(key: &str) -> Option<DecisionNode> {
    let mut parts = key.split('-');
    if parts.next()? != "h" {
        return None;
    }
    let opponent_counts = parts.map(|p| p.parse().ok()).collect::<Option<Vec<usize>>>()?;
    Some(DecisionNode { opponent_counts })
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<FingerprintSet> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("label") || header.get(1) != Some("set") {
        return Err(Error::params("fingerprint matrix must start with columns label,set"));
    }
    let nodes = header
        .iter()
        .skip(2)
        .map(|k| parse_key(k).ok_or_else(|| Error::params(format!("bad node column `{k}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|e| Error::params(format!("bad value `{v}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FingerprintRow {
            label: rec[0].to_string(),
            set: rec[1].to_string(),
            vector: FeatureVector { values },
        });
    }
    Ok(FingerprintSet { nodes, rows })
}

/// Columns: `label,set,pc1,pc2`. A missing second component is written as 0.
pub fn write_projections_csv<W: Write>(set: &FingerprintSet, pca: &PcaResult, out: W) -> Result<()> {
    if pca.projections.len() != set.rows.len() {
        return Err(Error::LengthMismatch {
            expected: set.rows.len(),
            actual: pca.projections.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "set", "pc1", "pc2"])?;
    for (row, p) in set.rows.iter().zip(&pca.projections) {
        let pc1 = p.first().copied().unwrap_or(0.0);
        let pc2 = p.get(1).copied().unwrap_or(0.0);
        w.write_record([row.label.clone(), row.set.clone(), pc1.to_string(), pc2.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
