//! Build all six saturation variants of one graph and compare their
//! statistics, then reduce the richest variant to the candidate
//! neighborhood.

use std::collections::BTreeSet;

use kgmatch::alignment::{alignment_predicates, strip_alignments};
use kgmatch::graph::WellKnownIris;
use kgmatch::saturation::{build_variant, reduce_to_khop, VariantTag};
use kgmatch::synth::{candidate_set, generate, SynthConfig};

fn main() -> kgmatch::Result<()> {
    let (graph, _) = generate(&SynthConfig::default())?;
    let candidates = candidate_set(&graph);
    let candidate_ids: BTreeSet<_> = candidates
        .iter()
        .filter_map(|iri| graph.node_id(iri))
        .collect();
    let (stripped, links) = strip_alignments(&graph, &candidate_ids, &alignment_predicates(&graph))?;
    println!("stripped {} alignment links before inference", links.len());

    let wk = WellKnownIris::default();
    println!("variant   nodes   edges   preds   added   merged   inverses");
    for tag in VariantTag::ALL {
        let (variant, report, _) = build_variant(&stripped, tag, &wk)?;
        println!(
            "{tag:<9} {:<7} {:<7} {:<7} {:<7} {:<8} {}",
            report.after.node_count,
            report.after.edge_count,
            report.after.predicate_count,
            report.added_triples,
            report.merged_nodes,
            report.abstract_inverses_added
        );
        if tag == VariantTag::G5 {
            let seeds: BTreeSet<_> = candidates
                .iter()
                .filter_map(|iri| variant.node_id(iri))
                .collect();
            let reduced = reduce_to_khop(&variant, &seeds, 3)?;
            let stats = reduced.stats();
            println!(
                "  3-hop reduction keeps {} nodes / {} edges",
                stats.node_count, stats.edge_count
            );
        }
    }
    Ok(())
}
