use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::record::ExperimentRecord;
use crate::error::{Error, Result};
use crate::sign_models::Model;
use crate::stats::{ks_two_sample, mean_sd, quantile_sorted};

/// Statistics of ω over all records sharing (N, model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub model: Model,
    #[serde(rename = "Q")]
    pub q: u64,
    pub trials: usize,
    pub log2_n: f64,
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub fraction_optimal: f64,
    /// mean ω / log₂N.
    pub normalized_mean: f64,
    pub epsilon: f64,
    /// Fraction of ω in [(2-ε)log₂N, (2+ε)log₂N].
    pub fraction_in_band: f64,
}

fn group(records: &[ExperimentRecord]) -> BTreeMap<(u64, Model), Vec<&ExperimentRecord>> {
    let mut groups: BTreeMap<(u64, Model), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.n, r.model)).or_default().push(r);
    }
    groups
}

pub fn summarize(records: &[ExperimentRecord], epsilon: f64) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::domain("no records to summarize"));
    }
    let mut rows = Vec::new();
    for ((n, model), rs) in group(records) {
        let mut xs: Vec<f64> = rs.iter().map(|r| r.omega as f64).collect();
        xs.sort_by(f64::total_cmp);
        let (mean, sd) = mean_sd(&xs);
        let l = (n as f64).log2();
        let lo = (2.0 - epsilon) * l;
        let hi = (2.0 + epsilon) * l;
        let trials = xs.len();
        rows.push(SummaryRow {
            n,
            model,
            q: rs[0].q,
            trials,
            log2_n: l,
            min: xs[0] as usize,
            max: xs[trials - 1] as usize,
            mean,
            sd,
            median: quantile_sorted(&xs, 0.5),
            q10: quantile_sorted(&xs, 0.1),
            q90: quantile_sorted(&xs, 0.9),
            fraction_optimal: rs.iter().filter(|r| r.optimal).count() as f64 / trials as f64,
            normalized_mean: mean / l,
            epsilon,
            fraction_in_band: xs.iter().filter(|&&x| x >= lo && x <= hi).count() as f64 / trials as f64,
        });
    }
    Ok(rows)
}

const CSV_HEADER: &str =
    "N,model,Q,trials,log2_N,min,max,mean,sd,median,q10,q90,fraction_optimal,normalized_mean,epsilon,fraction_in_band";

pub fn write_summary_csv<W: Write>(mut w: W, rows: &[SummaryRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:.6},{},{},{:.6},{:.6},{},{},{},{:.6},{:.6},{},{:.6}",
            r.n,
            r.model,
            r.q,
            r.trials,
            r.log2_n,
            r.min,
            r.max,
            r.mean,
            r.sd,
            r.median,
            r.q10,
            r.q90,
            r.fraction_optimal,
            r.normalized_mean,
            r.epsilon,
            r.fraction_in_band
        )?;
    }
    Ok(())
}

/// Two-sample comparison of ω between models at one modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    #[serde(rename = "N")]
    pub n: u64,
    pub first: Model,
    pub second: Model,
    pub mean_first: f64,
    pub mean_second: f64,
    pub ks_statistic: f64,
    /// Asymptotic critical value at level 0.01.
    pub ks_critical: f64,
}

impl ModelComparison {
    pub fn mean_difference(&self) -> f64 {
        self.mean_first - self.mean_second
    }

    pub fn ks_rejects(&self) -> bool {
        self.ks_statistic > self.ks_critical
    }
}

pub fn compare_models(records: &[ExperimentRecord], n: u64, first: Model, second: Model) -> Result<ModelComparison> {
    let pick = |m: Model| -> Vec<f64> {
        records.iter().filter(|r| r.n == n && r.model == m).map(|r| r.omega as f64).collect()
    };
    let a = pick(first);
    let b = pick(second);
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain(format!("need records of both {first} and {second} at N = {n}")));
    }
    let (ks_statistic, ks_critical) = ks_two_sample(&a, &b, 0.01);
    Ok(ModelComparison {
        n,
        first,
        second,
        mean_first: mean_sd(&a).0,
        mean_second: mean_sd(&b).0,
        ks_statistic,
        ks_critical,
    })
}
