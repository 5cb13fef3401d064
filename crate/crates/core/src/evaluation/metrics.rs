use std::fmt::Write as _;

use super::EvalError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RankingReport {
    pub task: String,
    pub pool_size: usize,
    pub ranks: Vec<f64>,
    pub hits_at_1: f64,
    pub hits_at_10: f64,
    pub hits_at_100: f64,
    pub median_rank: f64,
    pub mrr: f64,
    pub mean_rank: f64,
    pub auc: f64,
}

impl RankingReport {
    /// One `key=value` line per metric.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "task={}", self.task);
        let _ = writeln!(s, "queries={}", self.ranks.len());
        let _ = writeln!(s, "pool={}", self.pool_size);
        for (k, v) in self.metrics() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn metrics(&self) -> [(&'static str, f64); 7] {
        [
            ("H@1", self.hits_at_1),
            ("H@10", self.hits_at_10),
            ("H@100", self.hits_at_100),
            ("Med", self.median_rank),
            ("MRR", self.mrr),
            ("MR", self.mean_rank),
            ("AUC", self.auc),
        ]
    }
}

/// Aligned plain-text table, one row per report.
pub fn format_table(reports: &[RankingReport]) -> String {
    let header = ["task", "queries", "pool", "H@1", "H@10", "H@100", "Med", "MRR", "MR", "AUC"];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.task.clone(), r.ranks.len().to_string(), r.pool_size.to_string()];
            row.extend([r.hits_at_1, r.hits_at_10, r.hits_at_100].map(|h| format!("{h:.3}")));
            row.push(format!("{}", r.median_rank));
            row.push(format!("{:.3}", r.mrr));
            row.push(format!("{:.1}", r.mean_rank));
            row.push(format!("{:.3}", r.auc));
            row
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for r in &rows {
        line(r.iter().map(String::as_str).collect());
    }
    out
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Hits@{1,10,100}, median rank, MRR, mean rank and AUC, the latter as the
/// mean of `(pool − rank)/(pool − 1)`.
pub fn aggregate_metrics(ranks: &[f64], pool_size: usize) -> Result<RankingReport, EvalError> {
    if ranks.is_empty() {
        return Err(EvalError::NoRanks);
    }
    if pool_size < 2 {
        return Err(EvalError::PoolTooSmall(pool_size));
    }
    if let Some(&rank) = ranks.iter().find(|&&r| !(1.0..=pool_size as f64).contains(&r)) {
        return Err(EvalError::RankOutOfRange { rank, pool: pool_size });
    }
    let n = ranks.len() as f64;
    let hits = |k: f64| ranks.iter().filter(|&&r| r <= k).count() as f64 / n;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pool = pool_size as f64;
    Ok(RankingReport {
        task: String::new(),
        pool_size,
        ranks: ranks.to_vec(),
        hits_at_1: hits(1.0),
        hits_at_10: hits(10.0),
        hits_at_100: hits(100.0),
        median_rank: median(&sorted),
        mrr: ranks.iter().map(|r| 1.0 / r).sum::<f64>() / n,
        mean_rank: ranks.iter().sum::<f64>() / n,
        auc: ranks.iter().map(|r| (pool - r) / (pool - 1.0)).sum::<f64>() / n,
    })
}
