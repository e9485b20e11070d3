//! Graph variants produced by running inference rules to saturation.
//!
//! Six variants are supported, tagged `g0..g5`. The baseline `g0` only adds
//! abstract inverses (one synthetic predicate per original predicate whose
//! adjacency is the transpose of the original). `g1` contracts sameAs
//! components into single representative nodes, `g2` replaces abstract
//! inverses with declared inverse/symmetry semantics where axioms exist,
//! `g3` materializes the predicate hierarchy, `g4` materializes types through
//! the class hierarchy, and `g5` combines all of them.
//!
//! `build_variant` runs the flagged rules to a global fixpoint: closure and
//! completion rules are iterated together (each iteration re-extracts the
//! schema, since rules can materialize new axiom triples), and abstract
//! inverses are added last, over original predicates only. Inverse predicates
//! are never themselves closed or inverted.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dsu::UnionFind;
use crate::error::{Error, Result};
use crate::graph::{
    extract_schema, GraphStats, KnowledgeGraph, NodeId, PredId, SchemaInfo, Triple, WellKnownIris,
};

/// Suffix appended to a predicate IRI to name its abstract inverse.
pub const INVERSE_SUFFIX: &str = "#inv";

/// The six graph variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantTag {
    G0,
    G1,
    G2,
    G3,
    G4,
    G5,
}

/// Which transformations a variant enables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VariantFlags {
    pub contract_sameas: bool,
    pub inverse_symmetry_semantics: bool,
    pub close_predicates: bool,
    pub close_classes: bool,
}

impl VariantTag {
    pub const ALL: [VariantTag; 6] = [
        VariantTag::G0,
        VariantTag::G1,
        VariantTag::G2,
        VariantTag::G3,
        VariantTag::G4,
        VariantTag::G5,
    ];

    pub fn flags(self) -> VariantFlags {
        match self {
            VariantTag::G0 => VariantFlags::default(),
            VariantTag::G1 => VariantFlags {
                contract_sameas: true,
                ..VariantFlags::default()
            },
            VariantTag::G2 => VariantFlags {
                inverse_symmetry_semantics: true,
                ..VariantFlags::default()
            },
            VariantTag::G3 => VariantFlags {
                close_predicates: true,
                ..VariantFlags::default()
            },
            VariantTag::G4 => VariantFlags {
                close_classes: true,
                ..VariantFlags::default()
            },
            VariantTag::G5 => VariantFlags {
                contract_sameas: true,
                inverse_symmetry_semantics: true,
                close_predicates: true,
                close_classes: true,
            },
        }
    }
}

impl std::fmt::Display for VariantTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VariantTag::G0 => "g0",
            VariantTag::G1 => "g1",
            VariantTag::G2 => "g2",
            VariantTag::G3 => "g3",
            VariantTag::G4 => "g4",
            VariantTag::G5 => "g5",
        };
        f.pad(s)
    }
}

impl std::str::FromStr for VariantTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g0" => Ok(VariantTag::G0),
            "g1" => Ok(VariantTag::G1),
            "g2" => Ok(VariantTag::G2),
            "g3" => Ok(VariantTag::G3),
            "g4" => Ok(VariantTag::G4),
            "g5" => Ok(VariantTag::G5),
            other => Err(Error::Parameter(format!("unknown variant tag `{other}`"))),
        }
    }
}

/// Before/after bookkeeping for one variant build.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaturationReport {
    pub variant: VariantTag,
    pub before: GraphStats,
    pub after: GraphStats,
    /// Triples materialized by closure, completion, and inverse rules
    /// (counted after contraction).
    pub added_triples: usize,
    /// Nodes merged away by sameAs contraction.
    pub merged_nodes: usize,
    /// Abstract inverse predicates created.
    pub abstract_inverses_added: usize,
    /// Hierarchies are closed over original predicates first; inverse
    /// adjacencies are transposed afterwards and never re-closed.
    pub closures_applied_before_inverses: bool,
}

/// Maps every node of the input graph to its node in the contracted graph.
#[derive(Debug, Clone)]
pub struct ContractionMap {
    to_new: Vec<NodeId>,
    merged: usize,
}

impl ContractionMap {
    pub fn identity(n: usize) -> Self {
        ContractionMap {
            to_new: (0..n as u32).map(NodeId).collect(),
            merged: 0,
        }
    }

    pub fn map(&self, old: NodeId) -> NodeId {
        self.to_new[old.idx()]
    }

    pub fn merged_count(&self) -> usize {
        self.merged
    }

    /// IRI-level view of the non-identity entries.
    pub fn merged_iris(
        &self,
        old: &KnowledgeGraph,
        new: &KnowledgeGraph,
    ) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        for old_id in old.node_ids_iter() {
            let old_iri = old.node_iri(old_id)?;
            let new_iri = new.node_iri(self.map(old_id))?;
            if old_iri != new_iri {
                out.insert(old_iri.to_string(), new_iri.to_string());
            }
        }
        Ok(out)
    }
}

/// Adds an abstract inverse for every original predicate. The inverse's
/// triple set is the exact transpose of the original's.
pub fn add_abstract_inverses(g: &KnowledgeGraph) -> Result<(KnowledgeGraph, usize)> {
    add_abstract_inverses_except(g, &BTreeSet::new())
}

/// As `add_abstract_inverses`, skipping the exempted predicates.
pub fn add_abstract_inverses_except(
    g: &KnowledgeGraph,
    exempt: &BTreeSet<PredId>,
) -> Result<(KnowledgeGraph, usize)> {
    if g.has_abstract_inverses() {
        return Err(Error::Parameter(
            "graph already contains abstract inverses".into(),
        ));
    }
    let mut out = g.clone();
    let originals: Vec<PredId> = g.pred_ids_iter().collect();
    let mut added = 0usize;
    for r in originals {
        if exempt.contains(&r) {
            continue;
        }
        let inv_iri = format!("{}{}", g.pred_iri(r)?, INVERSE_SUFFIX);
        let inv = out.intern_pred(&inv_iri);
        out.tag_abstract_inverse(inv, r);
        added += 1;
        for t in g.triples().filter(|t| t.predicate == r) {
            out.insert(Triple::new(t.object, inv, t.subject));
        }
    }
    Ok((out, added))
}

/// Contracts sameAs connected components (edges taken undirected) into one
/// representative per component: the lexicographically smallest IRI. All
/// incident edges are re-targeted, sameAs edges are removed, and self-loops
/// produced solely by the contraction are dropped. Pre-existing self-loops
/// survive.
pub fn contract_sameas(
    g: &KnowledgeGraph,
    sameas: PredId,
) -> Result<(KnowledgeGraph, ContractionMap)> {
    let n = g.node_count();
    let mut uf = UnionFind::new(n);
    for t in g.triples().filter(|t| t.predicate == sameas) {
        uf.union(t.subject.idx(), t.object.idx());
    }
    // representative per component root: smallest IRI
    let mut rep_of_root: BTreeMap<usize, NodeId> = BTreeMap::new();
    for id in g.node_ids_iter() {
        let root = uf.find(id.idx());
        let iri = g.node_iri(id)?;
        match rep_of_root.get(&root) {
            Some(&cur) if g.node_iri(cur)? <= iri => {}
            _ => {
                rep_of_root.insert(root, id);
            }
        }
    }
    let mut out = KnowledgeGraph::new();
    let mut to_new = Vec::with_capacity(n);
    let mut merged = 0usize;
    for id in g.node_ids_iter() {
        let rep = rep_of_root[&uf.find(id.idx())];
        if rep != id {
            merged += 1;
        }
        let new_id = out.intern_node(g.node_iri(rep)?);
        to_new.push(new_id);
    }
    for t in g.triples() {
        if t.predicate == sameas {
            continue;
        }
        let s = to_new[t.subject.idx()];
        let o = to_new[t.object.idx()];
        if s == o && t.subject != t.object {
            continue; // self-loop created by the contraction
        }
        let p = out.intern_pred(g.pred_iri(t.predicate)?);
        out.insert(Triple::new(s, p, o));
    }
    Ok((out, ContractionMap { to_new, merged }))
}

/// Reachability sets over a directed axiom relation given as node pairs.
/// Cycles make their members mutually reachable, which is exactly the
/// "treat cyclic hierarchy members as equivalent" closure semantics.
fn reachable_supers(edges: &BTreeSet<(NodeId, NodeId)>) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
    let mut adj: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().insert(b);
    }
    let mut out = BTreeMap::new();
    for &start in adj.keys() {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<NodeId> = VecDeque::new();
        queue.push_back(start);
        while let Some(x) = queue.pop_front() {
            if let Some(next) = adj.get(&x) {
                for &y in next {
                    if seen.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
        }
        seen.remove(&start);
        out.insert(start, seen);
    }
    out
}

/// Materializes every triple implied by the reflexive-transitive closure of
/// the subPropertyOf axioms in `schema`. Super-predicates are interned on
/// demand.
pub fn close_predicate_hierarchy(g: &KnowledgeGraph, schema: &SchemaInfo) -> Result<KnowledgeGraph> {
    let mut out = g.clone();
    if schema.subproperty_edges.is_empty() {
        return Ok(out);
    }
    let supers = reachable_supers(&schema.subproperty_edges);
    for (&sub_node, super_nodes) in &supers {
        let sub_iri = g.node_iri(sub_node)?;
        let Some(sub_pred) = g.pred_id(sub_iri) else {
            continue; // axiom about an IRI never used as a predicate
        };
        let triples: Vec<Triple> = g
            .triples()
            .filter(|t| t.predicate == sub_pred)
            .copied()
            .collect();
        if triples.is_empty() {
            continue;
        }
        for &super_node in super_nodes {
            let super_iri = g.node_iri(super_node)?.to_string();
            let super_pred = out.intern_pred(&super_iri);
            for t in &triples {
                out.insert(Triple::new(t.subject, super_pred, t.object));
            }
        }
    }
    Ok(out)
}

/// Completes `type` edges through the transitive closure of the subClassOf
/// axioms in `schema`.
pub fn close_class_hierarchy(g: &KnowledgeGraph, schema: &SchemaInfo) -> Result<KnowledgeGraph> {
    let mut out = g.clone();
    let (Some(type_pred), false) = (schema.type_pred, schema.subclass_edges.is_empty()) else {
        return Ok(out);
    };
    let supers = reachable_supers(&schema.subclass_edges);
    for t in g.triples().filter(|t| t.predicate == type_pred) {
        if let Some(super_classes) = supers.get(&t.object) {
            for &c in super_classes {
                out.insert(Triple::new(t.subject, type_pred, c));
            }
        }
    }
    Ok(out)
}

/// Symmetric predicate IRIs and declared inverse IRI pairs.
type DeclaredInverses = (BTreeSet<String>, BTreeSet<(String, String)>);

/// Predicates exempt from abstract inverses under declared-semantics
/// handling, resolved from the schema. Errors when a predicate is declared
/// both symmetric and half of an inverse pair with a different predicate;
/// a self-inverse declaration counts as symmetry.
fn inverse_exemptions(g: &KnowledgeGraph, schema: &SchemaInfo) -> Result<DeclaredInverses> {
    let mut symmetric: BTreeSet<String> = BTreeSet::new();
    for &node in &schema.symmetric_predicates {
        symmetric.insert(g.node_iri(node)?.to_string());
    }
    let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
    for &(a, b) in &schema.inverse_pairs {
        let ia = g.node_iri(a)?.to_string();
        let ib = g.node_iri(b)?.to_string();
        if ia == ib {
            symmetric.insert(ia);
        } else {
            pairs.insert((ia, ib));
        }
    }
    for (a, b) in &pairs {
        for (this, other) in [(a, b), (b, a)] {
            if symmetric.contains(this) {
                return Err(Error::SchemaConflict {
                    predicate: this.clone(),
                    other: other.clone(),
                });
            }
        }
    }
    Ok((symmetric, pairs))
}

/// One round of symmetry/inverse completion: symmetric predicates get their
/// transposes, declared inverse pairs get each other's transposes. Returns
/// whether anything was added.
fn complete_inverse_symmetry(g: &mut KnowledgeGraph, schema: &SchemaInfo) -> Result<bool> {
    let (symmetric, pairs) = inverse_exemptions(g, schema)?;
    let mut additions: Vec<Triple> = Vec::new();
    for iri in &symmetric {
        if let Some(p) = g.pred_id(iri) {
            for t in g.triples().filter(|t| t.predicate == p) {
                additions.push(Triple::new(t.object, p, t.subject));
            }
        }
    }
    let mut interned: Vec<(String, Vec<(NodeId, NodeId)>)> = Vec::new();
    for (a, b) in &pairs {
        for (this, other) in [(a, b), (b, a)] {
            if let Some(p) = g.pred_id(this) {
                let transposed: Vec<(NodeId, NodeId)> = g
                    .triples()
                    .filter(|t| t.predicate == p)
                    .map(|t| (t.object, t.subject))
                    .collect();
                if !transposed.is_empty() {
                    interned.push((other.clone(), transposed));
                }
            }
        }
    }
    let mut changed = false;
    for t in additions {
        changed |= g.insert(t);
    }
    for (iri, edges) in interned {
        let p = g.intern_pred(&iri);
        for (s, o) in edges {
            changed |= g.insert(Triple::new(s, p, o));
        }
    }
    Ok(changed)
}

/// Declared inverse/symmetry handling: completes symmetric and declared
/// inverse adjacencies to exact (self-)transposes, then adds abstract
/// inverses for every remaining predicate.
pub fn apply_inverse_symmetry(
    g: &KnowledgeGraph,
    schema: &SchemaInfo,
) -> Result<(KnowledgeGraph, usize)> {
    let mut out = g.clone();
    // multiple declarations may chain through shared predicates
    while complete_inverse_symmetry(&mut out, schema)? {}
    let (symmetric, pairs) = inverse_exemptions(&out, schema)?;
    let mut exempt: BTreeSet<PredId> = BTreeSet::new();
    for iri in symmetric
        .iter()
        .chain(pairs.iter().flat_map(|(a, b)| [a, b]))
    {
        if let Some(p) = out.pred_id(iri) {
            exempt.insert(p);
        }
    }
    add_abstract_inverses_except(&out, &exempt)
}

/// Builds one graph variant: contraction first, then the flagged closure and
/// completion rules iterated to a global fixpoint (the schema is re-extracted
/// every round since rules can materialize new axiom triples), then inverse
/// handling over the saturated original predicates.
pub fn build_variant(
    k: &KnowledgeGraph,
    tag: VariantTag,
    wk: &WellKnownIris,
) -> Result<(KnowledgeGraph, SaturationReport, ContractionMap)> {
    let flags = tag.flags();
    let before = k.stats();
    let (mut g, cmap) = if flags.contract_sameas {
        match k.pred_id(&wk.same_as) {
            Some(sameas) => contract_sameas(k, sameas)?,
            None => (k.clone(), ContractionMap::identity(k.node_count())),
        }
    } else {
        (k.clone(), ContractionMap::identity(k.node_count()))
    };
    let base_edges = g.stats().edge_count;

    if flags.close_predicates || flags.close_classes || flags.inverse_symmetry_semantics {
        loop {
            let edges_at_start = g.triple_count();
            let schema = extract_schema(&g, wk);
            if flags.close_predicates {
                g = close_predicate_hierarchy(&g, &schema)?;
            }
            if flags.close_classes {
                let schema = extract_schema(&g, wk);
                g = close_class_hierarchy(&g, &schema)?;
            }
            if flags.inverse_symmetry_semantics {
                let schema = extract_schema(&g, wk);
                complete_inverse_symmetry(&mut g, &schema)?;
            }
            if g.triple_count() == edges_at_start {
                break;
            }
        }
    }

    let (g, inverses_added) = if flags.inverse_symmetry_semantics {
        let schema = extract_schema(&g, wk);
        apply_inverse_symmetry(&g, &schema)?
    } else {
        add_abstract_inverses(&g)?
    };

    let after = g.stats();
    let report = SaturationReport {
        variant: tag,
        before,
        after,
        added_triples: after.edge_count - base_edges,
        merged_nodes: cmap.merged_count(),
        abstract_inverses_added: inverses_added,
        closures_applied_before_inverses: true,
    };
    Ok((g, report, cmap))
}

/// Keeps exactly the nodes reachable from any seed by an undirected
/// breadth-first traversal of at most `k` edges, and all triples among them.
pub fn reduce_to_khop(
    g: &KnowledgeGraph,
    seeds: &BTreeSet<NodeId>,
    k: usize,
) -> Result<KnowledgeGraph> {
    let n = g.node_count();
    for &s in seeds {
        if s.idx() >= n {
            return Err(Error::UnknownId {
                kind: "node",
                id: s.0,
            });
        }
    }
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for t in g.triples() {
        adjacency[t.subject.idx()].push(t.object.0);
        adjacency[t.object.idx()].push(t.subject.0);
    }
    let mut dist: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    for &s in seeds {
        dist[s.idx()] = Some(0);
        queue.push_back(s.idx());
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have distances");
        if d == k {
            continue;
        }
        for &v in &adjacency[u] {
            if dist[v as usize].is_none() {
                dist[v as usize] = Some(d + 1);
                queue.push_back(v as usize);
            }
        }
    }
    let mut out = KnowledgeGraph::new();
    let mut kept: Vec<bool> = vec![false; n];
    for id in g.node_ids_iter() {
        if dist[id.idx()].is_some() {
            kept[id.idx()] = true;
            out.intern_node(g.node_iri(id)?);
        }
    }
    for t in g.triples() {
        if kept[t.subject.idx()] && kept[t.object.idx()] {
            out.add(
                g.node_iri(t.subject)?,
                g.pred_iri(t.predicate)?,
                g.node_iri(t.object)?,
            );
        }
    }
    Ok(out)
}
