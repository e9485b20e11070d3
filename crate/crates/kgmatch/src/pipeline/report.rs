//! Consolidated result tables over a completed run directory.
//!
//! One row per (clustering, variant, threshold, algorithm, metric) with the
//! cross-fold mean and standard deviation, plus two boolean best-flags: the
//! best algorithm within a (clustering, variant, threshold, metric) group
//! and the best variant within a (clustering, threshold, algorithm, metric)
//! group. Ties flag every tied row.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{cross_validated_report, format_mean_std, FoldMetrics};

use super::{cell_name, io, CellMetrics, RunManifest};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub clustering: String,
    pub variant: String,
    pub threshold: usize,
    pub algorithm: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub formatted: String,
    pub best_algorithm: bool,
    pub best_variant: bool,
}

const METRICS: [&str; 3] = ["acc", "ari", "nmi"];

fn metric_value(m: &FoldMetrics, name: &str) -> f64 {
    match name {
        "acc" => m.acc,
        "ari" => m.ari,
        _ => m.nmi,
    }
}

/// Builds the consolidated tables and writes `report/report.csv` and
/// `report/report.json`. Errors when no complete (all five folds) group
/// exists.
pub fn cmd_report(out: &Path) -> Result<Vec<ReportRow>> {
    let manifest: RunManifest = io::read_json(&out.join("manifest.json"))?;
    let config = &manifest.config;
    let mut rows: Vec<ReportRow> = Vec::new();
    for &ci in &config.clusterings {
        for &gj in &config.variants {
            for &threshold in &config.thresholds {
                for &alg in &config.algorithms {
                    let mut folds = Vec::new();
                    for fold in 1..=5usize {
                        let path = out
                            .join("cells")
                            .join(cell_name(ci, gj, fold))
                            .join(format!("metrics_{alg}_t{threshold}.json"));
                        if !path.exists() {
                            break;
                        }
                        match io::read_json::<CellMetrics>(&path)? {
                            CellMetrics::Metrics(m) => folds.push(m),
                            CellMetrics::Skipped { .. } => break,
                        }
                    }
                    if folds.len() != 5 {
                        continue; // incomplete group, not reportable
                    }
                    let report = cross_validated_report(&folds)?;
                    for metric in METRICS {
                        rows.push(ReportRow {
                            clustering: ci.to_string(),
                            variant: gj.to_string(),
                            threshold,
                            algorithm: alg.to_string(),
                            metric: metric.to_string(),
                            mean: metric_value(&report.mean, metric),
                            std: metric_value(&report.std, metric),
                            formatted: format_mean_std(
                                metric_value(&report.mean, metric),
                                metric_value(&report.std, metric),
                            ),
                            best_algorithm: false,
                            best_variant: false,
                        });
                    }
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Config(format!(
            "no complete result cells under {}",
            out.display()
        )));
    }

    // best among algorithms, fixing clustering/variant/threshold/metric
    let mut best_alg: BTreeMap<(String, String, usize, String), f64> = BTreeMap::new();
    for row in &rows {
        let key = (
            row.clustering.clone(),
            row.variant.clone(),
            row.threshold,
            row.metric.clone(),
        );
        let entry = best_alg.entry(key).or_insert(f64::NEG_INFINITY);
        if row.mean > *entry {
            *entry = row.mean;
        }
    }
    // best among variants, fixing clustering/threshold/algorithm/metric
    let mut best_var: BTreeMap<(String, usize, String, String), f64> = BTreeMap::new();
    for row in &rows {
        let key = (
            row.clustering.clone(),
            row.threshold,
            row.algorithm.clone(),
            row.metric.clone(),
        );
        let entry = best_var.entry(key).or_insert(f64::NEG_INFINITY);
        if row.mean > *entry {
            *entry = row.mean;
        }
    }
    for row in &mut rows {
        row.best_algorithm = row.mean
            == best_alg[&(
                row.clustering.clone(),
                row.variant.clone(),
                row.threshold,
                row.metric.clone(),
            )];
        row.best_variant = row.mean
            == best_var[&(
                row.clustering.clone(),
                row.threshold,
                row.algorithm.clone(),
                row.metric.clone(),
            )];
    }

    let mut csv = vec![
        "clustering,variant,threshold,algorithm,metric,mean,std,formatted,best_algorithm,best_variant"
            .to_string(),
    ];
    for row in &rows {
        csv.push(format!(
            "{},{},{},{},{},{},{},{},{},{}",
            row.clustering,
            row.variant,
            row.threshold,
            row.algorithm,
            row.metric,
            row.mean,
            row.std,
            row.formatted.replace(',', ";"),
            row.best_algorithm,
            row.best_variant
        ));
    }
    let mut files = BTreeMap::new();
    files.insert("report.csv".to_string(), (csv.join("\n") + "\n").into_bytes());
    files.insert(
        "report.json".to_string(),
        io::to_json_pretty(&rows)?.into_bytes(),
    );
    io::write_stage(&out.join("report"), &files)?;
    Ok(rows)
}
