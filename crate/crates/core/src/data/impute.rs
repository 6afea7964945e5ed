use serde::{Deserialize, Serialize};

use super::{DataError, RawTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeStrategy {
    /// Drop every row with a missing covariate.
    CaseDeletion,
    /// Fill a missing covariate with the column mean among subjects sharing
    /// the row's event status; the overall column mean when that group has no
    /// observed value.
    ConditionalMean,
}

/// Resolve missing cells. Rows missing the time or event value are deleted
/// under both strategies.
pub fn impute(table: &RawTable, strategy: ImputeStrategy) -> Result<RawTable, DataError> {
    let (tc, ec) = (table.time_column, table.event_column);
    let mut rows: Vec<Vec<Option<f64>>> = table
        .cells
        .iter()
        .filter(|r| r[tc].is_some() && r[ec].is_some())
        .cloned()
        .collect();
    let covs = table.covariate_columns();

    match strategy {
        ImputeStrategy::CaseDeletion => {
            rows.retain(|r| covs.iter().all(|&c| r[c].is_some()));
        }
        ImputeStrategy::ConditionalMean => {
            for &c in &covs {
                // (sum, count) for censored, event, overall
                let mut acc = [(0.0, 0usize); 3];
                for r in &rows {
                    if let Some(v) = r[c] {
                        let g = usize::from(r[ec] == Some(1.0));
                        acc[g].0 += v;
                        acc[g].1 += 1;
                        acc[2].0 += v;
                        acc[2].1 += 1;
                    }
                }
                if acc[2].1 == 0 {
                    if rows.is_empty() {
                        continue;
                    }
                    return Err(DataError::ColumnAllMissing(table.header[c].clone()));
                }
                let mean = |(s, k): (f64, usize)| s / k as f64;
                let overall = mean(acc[2]);
                let group_mean = [0, 1].map(|g| if acc[g].1 > 0 { mean(acc[g]) } else { overall });
                for r in rows.iter_mut() {
                    if r[c].is_none() {
                        let g = usize::from(r[ec] == Some(1.0));
                        r[c] = Some(group_mean[g]);
                    }
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(DataError::AllRowsDeleted);
    }
    Ok(RawTable {
        header: table.header.clone(),
        time_column: tc,
        event_column: ec,
        cells: rows,
    })
}
