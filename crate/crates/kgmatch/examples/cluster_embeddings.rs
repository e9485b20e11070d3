//! Cluster a toy point set with the three supported algorithms.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kgmatch::clustering::{optics_cluster, single_cluster, ward_cluster, DEFAULT_XI};

fn main() -> kgmatch::Result<()> {
    // three blobs of 15 points each
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let centers = [(0.0, 0.0), (8.0, 0.0), (4.0, 7.0)];
    let mut rows = Vec::new();
    for &(cx, cy) in &centers {
        for _ in 0..15 {
            rows.push([
                cx + rng.random_range(-0.5..0.5),
                cy + rng.random_range(-0.5..0.5),
            ]);
        }
    }
    let points = Array2::from_shape_fn((rows.len(), 2), |(i, j)| rows[i][j]);

    let ward = ward_cluster(&points.view(), 3)?;
    let single = single_cluster(&points.view(), 3)?;
    let optics = optics_cluster(&points.view(), 10, DEFAULT_XI)?;

    for assignment in [&ward, &single, &optics] {
        let mut sizes = std::collections::BTreeMap::new();
        for &l in &assignment.labels {
            *sizes.entry(l).or_insert(0usize) += 1;
        }
        println!(
            "{:<7} parameter {:<3} -> {} clusters, sizes {:?}",
            assignment.algorithm.to_string(),
            assignment.parameter,
            sizes.len(),
            sizes.values().collect::<Vec<_>>()
        );
    }
    Ok(())
}
