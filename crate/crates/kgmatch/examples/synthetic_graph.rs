//! Generate a synthetic knowledge graph with planted clusters, alignments,
//! duplicates, and ontology axioms, and inspect its ground-truth ledger.

use kgmatch::synth::{candidate_set, generate, SynthConfig};

fn main() -> kgmatch::Result<()> {
    let config = SynthConfig {
        seed: 7,
        ..SynthConfig::default()
    };
    let (graph, ledger) = generate(&config)?;
    let stats = graph.stats();
    println!(
        "generated {} nodes, {} edges, {} predicates",
        stats.node_count, stats.edge_count, stats.predicate_count
    );
    println!(
        "candidates: {} relationship nodes in {} planted clusters",
        candidate_set(&graph).len(),
        config.num_relationship_clusters
    );
    println!(
        "planted {} alignment links, {} duplicate entity copies, {} axioms",
        ledger.links.len(),
        ledger.duplicate_map.len(),
        ledger.axioms.len()
    );
    let mut by_relation = std::collections::BTreeMap::new();
    for link in &ledger.links {
        *by_relation.entry(link.relation.label()).or_insert(0usize) += 1;
    }
    for (relation, count) in by_relation {
        println!("  {relation}: {count} links");
    }
    Ok(())
}
