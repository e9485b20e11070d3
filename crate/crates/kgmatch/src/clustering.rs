//! Clustering of embedding rows: Ward and single-linkage agglomeration plus
//! OPTICS with xi-based extraction.
//!
//! The agglomerative engine keeps a per-cluster nearest-neighbor cache over
//! a Lance-Williams-updated distance matrix. Clusters live in slots indexed
//! by their smallest member; among equal-distance merge candidates the
//! lowest (i, j) slot pair wins, which makes merges reproducible against a
//! naive full-scan implementation.
//!
//! OPTICS runs with unbounded epsilon and `min_samples` equal to the minimum
//! cluster size, then extracts clusters from steep areas of the reachability
//! plot (xi method). Points outside every extracted cluster are noise and
//! receive fresh singleton labels so that downstream metrics stay total.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default steepness threshold for OPTICS cluster extraction.
pub const DEFAULT_XI: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ward,
    Single,
    Optics,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Algorithm::Ward => "ward",
            Algorithm::Single => "single",
            Algorithm::Optics => "optics",
        };
        f.pad(s)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ward" => Ok(Algorithm::Ward),
            "single" => Ok(Algorithm::Single),
            "optics" => Ok(Algorithm::Optics),
            other => Err(Error::Parameter(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Predicted cluster label per input row; labels are dense from 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<u32>,
    pub algorithm: Algorithm,
    /// Cluster count for Ward/Single, minimum cluster size for OPTICS.
    pub parameter: usize,
}

impl ClusterAssignment {
    pub fn cluster_count(&self) -> usize {
        self.labels.iter().collect::<std::collections::BTreeSet<_>>().len()
    }
}

fn squared_distance_rows(points: &ArrayView2<f64>, a: usize, b: usize) -> f64 {
    let (ra, rb) = (points.row(a), points.row(b));
    ra.iter()
        .zip(rb.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Linkage {
    Ward,
    Single,
}

/// Agglomeration over squared Euclidean distances. Returns per-point labels
/// after cutting the merge sequence at `k` clusters.
fn agglomerate(points: &ArrayView2<f64>, k: usize, linkage: Linkage) -> Result<Vec<u32>> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::Parameter(format!(
            "cluster count {k} out of range for {n} points"
        )));
    }
    // condensed distance matrix, indexed by slot pairs i < j
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = squared_distance_rows(points, i, j);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<usize> = vec![1; n];
    // nearest active slot above i and its distance
    let mut nn: Vec<usize> = vec![usize::MAX; n];
    let mut nn_dist: Vec<f64> = vec![f64::INFINITY; n];
    let recompute = |i: usize, active: &[bool], dist: &[f64]| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for j in (i + 1)..n {
            if active[j] && dist[i * n + j] < best.1 {
                best = (j, dist[i * n + j]);
            }
        }
        best
    };
    for i in 0..n {
        let (j, d) = recompute(i, &active, &dist);
        nn[i] = j;
        nn_dist[i] = d;
    }
    let mut membership: Vec<usize> = (0..n).collect();
    for _ in 0..(n - k) {
        // global minimum over fresh caches; ascending scan keeps the lowest
        // slot pair among ties
        let mut a = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if active[i] && nn[i] != usize::MAX && nn_dist[i] < best {
                best = nn_dist[i];
                a = i;
            }
        }
        let b = nn[a];
        let d_ab = nn_dist[a];
        active[b] = false;
        for slot in membership.iter_mut() {
            if *slot == b {
                *slot = a;
            }
        }
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for m in 0..n {
            if !active[m] || m == a {
                continue;
            }
            let d_am = dist[a * n + m];
            let d_bm = dist[b * n + m];
            let updated = match linkage {
                Linkage::Single => d_am.min(d_bm),
                Linkage::Ward => {
                    let nm = size[m] as f64;
                    ((na + nm) * d_am + (nb + nm) * d_bm - nm * d_ab) / (na + nb + nm)
                }
            };
            dist[a * n + m] = updated;
            dist[m * n + a] = updated;
        }
        size[a] += size[b];
        // refresh caches invalidated by the merge
        let (j, d) = recompute(a, &active, &dist);
        nn[a] = j;
        nn_dist[a] = d;
        for i in 0..a {
            if !active[i] {
                continue;
            }
            if nn[i] == a || nn[i] == b {
                let (j, d) = recompute(i, &active, &dist);
                nn[i] = j;
                nn_dist[i] = d;
            } else if dist[i * n + a] < nn_dist[i] {
                nn[i] = a;
                nn_dist[i] = dist[i * n + a];
            }
        }
        for i in (a + 1)..n {
            if active[i] && nn[i] == b {
                let (j, d) = recompute(i, &active, &dist);
                nn[i] = j;
                nn_dist[i] = d;
            }
        }
    }
    // dense labels in slot order
    let mut label_of_slot = std::collections::BTreeMap::new();
    let mut labels = vec![0u32; n];
    for p in 0..n {
        let slot = membership[p];
        let next = label_of_slot.len() as u32;
        labels[p] = *label_of_slot.entry(slot).or_insert(next);
    }
    Ok(labels)
}

/// Agglomerative clustering under the Ward variance criterion.
pub fn ward_cluster(points: &ArrayView2<f64>, k: usize) -> Result<ClusterAssignment> {
    Ok(ClusterAssignment {
        labels: agglomerate(points, k, Linkage::Ward)?,
        algorithm: Algorithm::Ward,
        parameter: k,
    })
}

/// Single-linkage agglomeration; equivalent to cutting the k-1 largest
/// edges of the Euclidean minimum spanning tree.
pub fn single_cluster(points: &ArrayView2<f64>, k: usize) -> Result<ClusterAssignment> {
    Ok(ClusterAssignment {
        labels: agglomerate(points, k, Linkage::Single)?,
        algorithm: Algorithm::Single,
        parameter: k,
    })
}

/// OPTICS reachability ordering with unbounded epsilon. Returns the visit
/// order and the reachability distance at each position (infinite for the
/// first point). Ties pick the lowest point index.
pub fn optics_ordering(points: &ArrayView2<f64>, min_samples: usize) -> (Vec<usize>, Vec<f64>) {
    let n = points.nrows();
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = squared_distance_rows(points, i, j).sqrt();
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    // core distance: the min_samples-th nearest point, the point itself
    // counting first
    let core: Vec<f64> = (0..n)
        .map(|i| {
            if n < min_samples {
                return f64::INFINITY;
            }
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[i * n + j]).collect();
            row.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            row[min_samples - 2]
        })
        .collect();

    let mut processed = vec![false; n];
    let mut reach = vec![f64::INFINITY; n];
    let mut order = Vec::with_capacity(n);
    let mut order_reach = Vec::with_capacity(n);
    // seed heap with lazy invalidation, ordered by (reachability, index)
    let mut seeds: std::collections::BinaryHeap<std::cmp::Reverse<(HeapF64, usize)>> =
        std::collections::BinaryHeap::new();

    let expand = |p: usize,
                      processed: &[bool],
                      reach: &mut [f64],
                      seeds: &mut std::collections::BinaryHeap<std::cmp::Reverse<(HeapF64, usize)>>| {
        if core[p].is_infinite() {
            return;
        }
        for q in 0..n {
            if processed[q] || q == p {
                continue;
            }
            let candidate = core[p].max(dist[p * n + q]);
            if candidate < reach[q] {
                reach[q] = candidate;
                seeds.push(std::cmp::Reverse((HeapF64(candidate), q)));
            }
        }
    };

    for start in 0..n {
        if processed[start] {
            continue;
        }
        processed[start] = true;
        order.push(start);
        order_reach.push(f64::INFINITY);
        expand(start, &processed, &mut reach, &mut seeds);
        while let Some(std::cmp::Reverse((HeapF64(r), q))) = seeds.pop() {
            if processed[q] || r != reach[q] {
                continue; // stale entry
            }
            processed[q] = true;
            order.push(q);
            order_reach.push(r);
            expand(q, &processed, &mut reach, &mut seeds);
        }
    }
    (order, order_reach)
}

/// Finite reachability values wrapped for heap ordering.
#[derive(PartialEq, PartialOrd)]
struct HeapF64(f64);

impl Eq for HeapF64 {}

#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for HeapF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).expect("reachabilities are never NaN")
    }
}

struct SteepDownArea {
    start: usize,
    end: usize,
    mib: f64,
}

/// Extracts cluster position ranges from a reachability plot via steep
/// up/down areas. A trailing infinite sentinel closes the final cluster;
/// the degenerate cluster spanning the whole ordering is discarded (it
/// carries no density contrast). Predecessor correction is not applied.
fn xi_cluster_ranges(reach: &[f64], min_cluster_size: usize, xi: f64) -> Vec<(usize, usize)> {
    let n = reach.len();
    if n < 2 {
        return Vec::new();
    }
    let mut plot = reach.to_vec();
    plot.push(f64::INFINITY);
    let complement = 1.0 - xi;
    let steep_down = |p: usize| -> bool {
        if plot[p].is_infinite() && plot[p + 1].is_infinite() {
            return false;
        }
        plot[p + 1] <= plot[p] * complement
    };
    let steep_up = |p: usize| -> bool {
        if plot[p].is_infinite() && plot[p + 1].is_infinite() {
            return false;
        }
        plot[p] <= plot[p + 1] * complement
    };
    let weak_down = |p: usize| plot[p + 1] <= plot[p];
    let weak_up = |p: usize| plot[p + 1] >= plot[p];
    let extend = |start: usize, steep: &dyn Fn(usize) -> bool, weak: &dyn Fn(usize) -> bool| {
        let mut end = start;
        let mut non_steep = 0usize;
        let mut i = start + 1;
        while i < n {
            if steep(i) {
                end = i;
                non_steep = 0;
            } else if weak(i) {
                non_steep += 1;
                if non_steep >= min_cluster_size {
                    break;
                }
            } else {
                break;
            }
            i += 1;
        }
        end
    };

    let mut sdas: Vec<SteepDownArea> = Vec::new();
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut index = 0usize;
    let mut mib = 0.0f64;
    while index < n {
        mib = mib.max(plot[index]);
        if steep_down(index) {
            filter_sdas(&mut sdas, mib, complement, &plot);
            let end = extend(index, &steep_down, &weak_down);
            sdas.push(SteepDownArea {
                start: index,
                end,
                mib: 0.0,
            });
            index = end + 1;
            mib = 0.0;
        } else if steep_up(index) {
            filter_sdas(&mut sdas, mib, complement, &plot);
            let u_start = index;
            let u_end = extend(index, &steep_up, &weak_up);
            index = u_end + 1;
            mib = 0.0;
            let boundary = plot[u_end + 1];
            // newest areas first so inner clusters precede their parents
            for sda in sdas.iter().rev() {
                if boundary * complement < sda.mib {
                    continue;
                }
                let mut c_start = sda.start;
                let mut c_end = u_end;
                let d_max = plot[sda.start];
                if d_max * complement >= boundary {
                    // start boundary dominates: shift the start right until
                    // the plot falls below the end boundary
                    while c_start < sda.end && plot[c_start + 1] > boundary {
                        c_start += 1;
                    }
                } else if boundary * complement >= d_max {
                    // end boundary dominates: shift the end left until the
                    // plot falls below the start boundary
                    while c_end > u_start && plot[c_end] > d_max {
                        c_end -= 1;
                    }
                }
                if c_end < c_start || c_end - c_start + 1 < min_cluster_size {
                    continue;
                }
                if c_start == 0 && c_end == n - 1 {
                    continue;
                }
                clusters.push((c_start, c_end));
            }
        } else {
            index += 1;
        }
    }
    clusters
}

fn filter_sdas(sdas: &mut Vec<SteepDownArea>, mib: f64, complement: f64, plot: &[f64]) {
    sdas.retain(|sda| mib <= plot[sda.start] * complement);
    for sda in sdas.iter_mut() {
        sda.mib = sda.mib.max(mib);
    }
}

/// OPTICS clustering: reachability ordering, xi extraction, and singleton
/// labels for noise points.
pub fn optics_cluster(
    points: &ArrayView2<f64>,
    min_cluster_size: usize,
    xi: f64,
) -> Result<ClusterAssignment> {
    if min_cluster_size < 2 {
        return Err(Error::Parameter(
            "minimum cluster size must be at least 2".into(),
        ));
    }
    let n = points.nrows();
    let (order, reach) = optics_ordering(points, min_cluster_size);
    let ranges = xi_cluster_ranges(&reach, min_cluster_size, xi);
    // assign positional labels outermost-first so leaves overwrite parents
    let mut by_extent = ranges.clone();
    by_extent.sort_by_key(|&(s, e)| (std::cmp::Reverse(e - s), s));
    let mut positional: Vec<Option<usize>> = vec![None; n];
    for (cluster_idx, &(s, e)) in by_extent.iter().enumerate() {
        for slot in positional.iter_mut().take(e + 1).skip(s) {
            *slot = Some(cluster_idx);
        }
    }
    // point-indexed raw labels; noise points become fresh singletons
    let mut raw: Vec<Option<usize>> = vec![None; n];
    for (pos, &point) in order.iter().enumerate() {
        raw[point] = positional[pos];
    }
    let mut labels = vec![0u32; n];
    let mut dense: std::collections::BTreeMap<usize, u32> = std::collections::BTreeMap::new();
    let mut next = 0u32;
    for p in 0..n {
        labels[p] = match raw[p] {
            Some(c) => *dense.entry(c).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            }),
            None => {
                let l = next;
                next += 1;
                l
            }
        };
    }
    Ok(ClusterAssignment {
        labels,
        algorithm: Algorithm::Optics,
        parameter: min_cluster_size,
    })
}
