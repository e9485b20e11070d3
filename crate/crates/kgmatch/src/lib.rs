//! Match nodes within an aggregated knowledge graph.
//!
//! The toolkit covers the full experimental loop:
//!
//! 1. [`graph`] — an interned triple store with an N-Triples reader/writer
//!    and schema-axiom extraction.
//! 2. [`saturation`] — six graph variants (`g0..g5`) produced by running
//!    inference rules (sameAs contraction, inverse/symmetry semantics,
//!    predicate- and class-hierarchy closure) to fixpoint, plus 3-hop
//!    neighborhood reduction.
//! 3. [`alignment`] — alignment links between match candidates, gold
//!    clusterings (`c0..c6`) as connected components, and stratified 5-fold
//!    splits.
//! 4. [`gcn`] — a 3-layer relational graph convolutional encoder with
//!    basis-decomposed per-predicate weights and featureless one-hot input
//!    handled by index lookup.
//! 5. [`training`] — the soft nearest neighbor loss with a learned inverse
//!    temperature, exact reverse-mode gradients, Adam, and early stopping.
//! 6. [`clustering`] — Ward, single-linkage, and OPTICS clustering of the
//!    output embeddings.
//! 7. [`evaluation`] — ACC / ARI / NMI against gold clusters,
//!    cross-validated reporting, and per-relation distance analysis.
//! 8. [`synth`] — a deterministic generator of desk-scale synthetic graphs
//!    with planted clusters, alignments, and ontology axioms.
//! 9. [`pipeline`] — the end-to-end run orchestrator behind the `kgmatch`
//!    binary.
//!
//! See the crate `examples/` directory for one runnable example per
//! capability.

pub mod alignment;
pub mod clustering;
mod dsu;
pub mod error;
pub mod evaluation;
pub mod gcn;
pub mod graph;
pub mod pipeline;
pub mod saturation;
pub mod synth;
pub mod training;

pub use error::{Error, Result};
