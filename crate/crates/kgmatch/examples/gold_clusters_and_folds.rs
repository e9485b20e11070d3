//! Derive the seven gold clusterings from planted alignment links and
//! split one of them into stratified cross-validation folds.

use kgmatch::alignment::{compute_gold_clustering, filter_min_size, split_folds, ClusteringId};
use kgmatch::synth::{candidate_set, generate, SynthConfig};

fn main() -> kgmatch::Result<()> {
    let (graph, ledger) = generate(&SynthConfig::default())?;
    let candidates = candidate_set(&graph);

    println!("clustering  relations                                     clusters  largest");
    for id in ClusteringId::ALL {
        let gc = compute_gold_clustering(&ledger.links, id, &candidates);
        let largest = gc.cluster_sizes.values().max().copied().unwrap_or(0);
        let relations: Vec<&str> = id.relations().iter().map(|r| r.label()).collect();
        println!(
            "{id:<11} {:<45} {:<9} {largest}",
            relations.join(","),
            gc.cluster_sizes.len()
        );
    }

    let gc = compute_gold_clustering(&ledger.links, ClusteringId::C0, &candidates);
    let eligible = filter_min_size(&gc, 10);
    println!(
        "\nthreshold 10 keeps {} of {} candidates",
        eligible.len(),
        candidates.len()
    );

    let folds = split_folds(&gc, 42);
    for fold in &folds {
        println!(
            "fold {}: train {} / val {} / test {}",
            fold.fold,
            fold.train.len(),
            fold.val.len(),
            fold.test.len()
        );
    }
    Ok(())
}
