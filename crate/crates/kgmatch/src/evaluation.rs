//! Scoring predicted clusters against gold clusters, cross-validated
//! reporting, and the per-relation distance analysis.
//!
//! ACC maximizes the matched-node count over label mappings (optimal
//! assignment on the contingency matrix). ARI uses the pair-counting
//! contingency formula in exact integer arithmetic; NMI uses natural
//! logarithms normalized by the arithmetic mean of the two entropies.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::alignment::{AlignmentLink, AlignmentRelation};
use crate::error::{Error, Result};

fn check_same_length(pred: &[u32], gold: &[u32]) -> Result<()> {
    if pred.len() != gold.len() {
        return Err(Error::Shape(format!(
            "label vectors differ in length: {} vs {}",
            pred.len(),
            gold.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Parameter("empty label vectors".into()));
    }
    Ok(())
}

fn dense_relabel(labels: &[u32]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    let dense = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (dense, map.len())
}

/// Contingency counts: `m[i][j]` is the number of nodes with gold label i
/// and predicted label j.
fn contingency(pred: &[u32], gold: &[u32]) -> (Vec<Vec<u64>>, usize, usize) {
    let (gold_dense, n_gold) = dense_relabel(gold);
    let (pred_dense, n_pred) = dense_relabel(pred);
    let mut m = vec![vec![0u64; n_pred]; n_gold];
    for (&g, &p) in gold_dense.iter().zip(&pred_dense) {
        m[g][p] += 1;
    }
    (m, n_gold, n_pred)
}

/// Maximum-weight assignment value on a square cost matrix (weights are
/// matched-node counts), via the shortest-augmenting-path Hungarian
/// algorithm on negated costs.
fn assignment_max(weights: &[Vec<i64>]) -> i64 {
    let n = weights.len();
    if n == 0 {
        return 0;
    }
    // minimize negated weights; potentials u, v with 1-based rows
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut matched_col = vec![0usize; n + 1]; // column -> row
    for i in 1..=n {
        matched_col[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_col[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_col[j0] = matched_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0i64;
    for j in 1..=n {
        if matched_col[j] != 0 {
            total += weights[matched_col[j] - 1][j - 1];
        }
    }
    total
}

/// Clustering accuracy: the best fraction of nodes whose predicted label
/// maps onto their gold label, maximized over label mappings.
pub fn accuracy(pred: &[u32], gold: &[u32]) -> Result<f64> {
    check_same_length(pred, gold)?;
    let (m, n_gold, n_pred) = contingency(pred, gold);
    let side = n_gold.max(n_pred);
    // pad with zero rows/columns so the assignment is square
    let weights: Vec<Vec<i64>> = (0..side)
        .map(|i| {
            (0..side)
                .map(|j| {
                    if i < n_gold && j < n_pred {
                        m[i][j] as i64
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    Ok(assignment_max(&weights) as f64 / pred.len() as f64)
}

fn choose2(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

fn same_partition(pred: &[u32], gold: &[u32]) -> bool {
    let (a, _) = dense_relabel(pred);
    let (b, _) = dense_relabel(gold);
    a == b
}

/// Adjusted Rand index via the contingency-table pair-counting formula,
/// computed in exact integer arithmetic. When the adjustment denominator is
/// zero (both partitions trivial), identical partitions score 1 and
/// anything else 0.
pub fn adjusted_rand_index(pred: &[u32], gold: &[u32]) -> Result<f64> {
    check_same_length(pred, gold)?;
    let (m, _, _) = contingency(pred, gold);
    let n = pred.len() as u64;
    let sum_cells: i128 = m.iter().flatten().map(|&c| choose2(c)).sum();
    let sum_rows: i128 = m
        .iter()
        .map(|row| choose2(row.iter().sum::<u64>()))
        .sum();
    let sum_cols: i128 = (0..m[0].len())
        .map(|j| choose2(m.iter().map(|row| row[j]).sum::<u64>()))
        .sum();
    let pairs = choose2(n);
    // ARI = (index - expected) / (max - expected), scaled through by pairs
    let numerator = 2 * (pairs * sum_cells - sum_rows * sum_cols);
    let denominator = pairs * (sum_rows + sum_cols) - 2 * sum_rows * sum_cols;
    if denominator == 0 {
        return Ok(if same_partition(pred, gold) { 1.0 } else { 0.0 });
    }
    Ok(numerator as f64 / denominator as f64)
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// How the two cluster entropies combine into the NMI denominator. The
/// arithmetic mean is the default everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NmiNormalization {
    #[default]
    Arithmetic,
    Geometric,
    Max,
    Min,
}

impl NmiNormalization {
    fn combine(self, h1: f64, h2: f64) -> f64 {
        match self {
            NmiNormalization::Arithmetic => 0.5 * (h1 + h2),
            NmiNormalization::Geometric => (h1 * h2).sqrt(),
            NmiNormalization::Max => h1.max(h2),
            NmiNormalization::Min => h1.min(h2),
        }
    }
}

/// Normalized mutual information with natural logarithms under the default
/// arithmetic-mean normalization. Two trivial partitions score 1.
pub fn normalized_mutual_information(pred: &[u32], gold: &[u32]) -> Result<f64> {
    normalized_mutual_information_with(pred, gold, NmiNormalization::default())
}

/// NMI with an explicit entropy-normalization rule.
pub fn normalized_mutual_information_with(
    pred: &[u32],
    gold: &[u32],
    normalization: NmiNormalization,
) -> Result<f64> {
    check_same_length(pred, gold)?;
    let (m, n_gold, n_pred) = contingency(pred, gold);
    let n = pred.len() as f64;
    let row_sums: Vec<u64> = m.iter().map(|row| row.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..n_pred)
        .map(|j| m.iter().map(|row| row[j]).sum())
        .collect();
    let mut mi = 0.0;
    for i in 0..n_gold {
        for j in 0..n_pred {
            let c = m[i][j];
            if c == 0 {
                continue;
            }
            let p = c as f64 / n;
            mi += p * ((c as f64 * n) / (row_sums[i] as f64 * col_sums[j] as f64)).ln();
        }
    }
    let denominator = normalization.combine(entropy(&row_sums, n), entropy(&col_sums, n));
    if denominator == 0.0 {
        return Ok(1.0);
    }
    Ok((mi / denominator).clamp(0.0, 1.0))
}

/// One fold's metric values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub acc: f64,
    pub ari: f64,
    pub nmi: f64,
}

/// Cross-fold aggregate: per-fold values plus mean and population standard
/// deviation per metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_fold: Vec<FoldMetrics>,
    pub mean: FoldMetrics,
    pub std: FoldMetrics,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregates exactly five fold entries into mean and population standard
/// deviation per metric.
pub fn cross_validated_report(per_fold: &[FoldMetrics]) -> Result<MetricReport> {
    if per_fold.len() != 5 {
        return Err(Error::Parameter(format!(
            "expected 5 folds, found {}",
            per_fold.len()
        )));
    }
    let (acc_m, acc_s) = mean_std(per_fold.iter().map(|f| f.acc));
    let (ari_m, ari_s) = mean_std(per_fold.iter().map(|f| f.ari));
    let (nmi_m, nmi_s) = mean_std(per_fold.iter().map(|f| f.nmi));
    Ok(MetricReport {
        per_fold: per_fold.to_vec(),
        mean: FoldMetrics {
            acc: acc_m,
            ari: ari_m,
            nmi: nmi_m,
        },
        std: FoldMetrics {
            acc: acc_s,
            ari: ari_s,
            nmi: nmi_s,
        },
    })
}

/// Two-decimal `mean ± std` formatting used by the consolidated tables.
pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.2} ± {std:.2}")
}

/// Quartile summary of one relation's distances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Euclidean distances between linked pairs for one alignment relation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceDistribution {
    pub relation: AlignmentRelation,
    /// (source, target, distance), deduplicated per undirected pair.
    pub pairs: Vec<(String, String, f64)>,
    /// None when no test-internal pair of this relation exists.
    pub summary: Option<DistanceSummary>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // linear interpolation between closest ranks
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Per-relation distances between linked pairs with both endpoints in the
/// test set. Embeddings are passed as rows indexed through `row_of`.
pub fn distance_analysis(
    embeddings: &ArrayView2<f64>,
    row_of: &BTreeMap<String, usize>,
    links: &[AlignmentLink],
    test_nodes: &BTreeSet<String>,
) -> Result<Vec<DistanceDistribution>> {
    let mut out = Vec::new();
    for relation in AlignmentRelation::ALL {
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::new();
        for link in links.iter().filter(|l| l.relation == relation) {
            if !test_nodes.contains(&link.source) || !test_nodes.contains(&link.target) {
                continue;
            }
            let key = if link.source <= link.target {
                (link.source.clone(), link.target.clone())
            } else {
                (link.target.clone(), link.source.clone())
            };
            if !seen.insert(key.clone()) {
                continue;
            }
            let (Some(&a), Some(&b)) = (row_of.get(&key.0), row_of.get(&key.1)) else {
                return Err(Error::Config(format!(
                    "no embedding for linked pair `{}` / `{}`",
                    key.0, key.1
                )));
            };
            let d = embeddings
                .row(a)
                .iter()
                .zip(embeddings.row(b).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            pairs.push((key.0, key.1, d));
        }
        let summary = if pairs.is_empty() {
            None
        } else {
            let mut sorted: Vec<f64> = pairs.iter().map(|p| p.2).collect();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
            Some(DistanceSummary {
                count: sorted.len(),
                min: sorted[0],
                q1: quantile(&sorted, 0.25),
                median: quantile(&sorted, 0.5),
                q3: quantile(&sorted, 0.75),
                max: sorted[sorted.len() - 1],
            })
        };
        out.push(DistanceDistribution {
            relation,
            pairs,
            summary,
        });
    }
    Ok(out)
}
