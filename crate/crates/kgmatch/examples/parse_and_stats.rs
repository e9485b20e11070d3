//! Parse an N-Triples snippet, query the adjacency indexes, and extract
//! schema axioms.

use kgmatch::graph::{extract_schema, parse_ntriples, WellKnownIris};

fn main() -> kgmatch::Result<()> {
    let source = r#"
# a tiny aggregated graph; the literal line is dropped on input
<http://ex/rel1> <http://ex/causes> <http://ex/drugA> .
<http://ex/rel1> <http://ex/causes> <http://ex/phenoB> .
<http://ex/rel2> <http://ex/causes> <http://ex/drugA> .
<http://ex/drugA> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex/Drug> .
<http://ex/Drug> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://ex/Chemical> .
<http://ex/drugA> <http://ex/label> "aspirin" .
"#;
    let outcome = parse_ntriples(std::io::Cursor::new(source))?;
    let g = outcome.graph;
    let stats = g.stats();
    println!(
        "parsed {} nodes, {} edges, {} predicates ({} literal lines dropped)",
        stats.node_count, stats.edge_count, stats.predicate_count, outcome.discarded_literals
    );

    let rel1 = g.node_id("http://ex/rel1").expect("interned");
    let causes = g.pred_id("http://ex/causes").expect("interned");
    let neighbors = g.neighbors(rel1, causes)?;
    println!("rel1 --causes--> {} nodes:", neighbors.len());
    for &n in neighbors {
        println!("  {}", g.node_iri(n)?);
    }

    let schema = extract_schema(&g, &WellKnownIris::default());
    println!(
        "schema: {} subclass axioms, {} subproperty axioms",
        schema.subclass_edges.len(),
        schema.subproperty_edges.len()
    );
    Ok(())
}
