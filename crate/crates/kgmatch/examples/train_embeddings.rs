//! Train the relational encoder under the soft nearest neighbor loss on a
//! saturated synthetic graph and watch the loss history.

use std::collections::BTreeSet;

use kgmatch::alignment::{
    alignment_predicates, compute_gold_clustering, split_folds, strip_alignments, ClusteringId,
};
use kgmatch::gcn::GcnConfig;
use kgmatch::graph::WellKnownIris;
use kgmatch::saturation::{build_variant, reduce_to_khop, VariantTag};
use kgmatch::synth::{candidate_set, generate, SynthConfig};
use kgmatch::training::{train, TrainConfig};

fn main() -> kgmatch::Result<()> {
    let (graph, _) = generate(&SynthConfig::default())?;
    let candidates = candidate_set(&graph);
    let candidate_ids: BTreeSet<_> = candidates
        .iter()
        .filter_map(|iri| graph.node_id(iri))
        .collect();
    let (stripped, links) = strip_alignments(&graph, &candidate_ids, &alignment_predicates(&graph))?;
    let gold = compute_gold_clustering(&links, ClusteringId::C0, &candidates);
    let folds = split_folds(&gold, 11);

    let (variant, _, _) = build_variant(&stripped, VariantTag::G5, &WellKnownIris::default())?;
    let seeds: BTreeSet<_> = candidates
        .iter()
        .filter_map(|iri| variant.node_id(iri))
        .collect();
    let reduced = reduce_to_khop(&variant, &seeds, 3)?;

    let outcome = train(
        &reduced,
        &gold,
        &folds[0],
        &GcnConfig::default(),
        &TrainConfig {
            seed: 3,
            ..TrainConfig::default()
        },
    )?;

    println!("epoch   train loss     val loss      T");
    for record in &outcome.history {
        println!(
            "{:<7} {:<14.6} {:<13.6} {:.4}",
            record.epoch, record.train_loss, record.val_loss, record.temperature
        );
    }
    println!(
        "best epoch {:?}, stopped early: {}, embeddings: {} x {}",
        outcome.best_epoch,
        outcome.stopped_early,
        outcome.embeddings.nrows(),
        outcome.embeddings.ncols()
    );
    Ok(())
}
