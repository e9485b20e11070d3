//! Alignment links between match candidates, gold clusterings, and fold
//! splits.
//!
//! Gold clusters are the connected components of the match-candidate set S
//! under a chosen subset of alignment relations, links taken undirected.
//! Seven subsets are predefined (`c0..c6`): everything, everything but
//! broadMatch, then each relation alone.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsu::UnionFind;
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId, PredId};

/// The five alignment relations, ordered from equivalence to weak/broader
/// similarity. broadMatch is the only non-symmetric one; its direction is
/// kept as metadata but every component computation ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AlignmentRelation {
    SameAs,
    CloseMatch,
    RelatedMatch,
    Related,
    BroadMatch,
}

impl AlignmentRelation {
    pub const ALL: [AlignmentRelation; 5] = [
        AlignmentRelation::SameAs,
        AlignmentRelation::CloseMatch,
        AlignmentRelation::RelatedMatch,
        AlignmentRelation::Related,
        AlignmentRelation::BroadMatch,
    ];

    pub fn iri(self) -> &'static str {
        match self {
            AlignmentRelation::SameAs => "http://www.w3.org/2002/07/owl#sameAs",
            AlignmentRelation::CloseMatch => "http://www.w3.org/2004/02/skos/core#closeMatch",
            AlignmentRelation::RelatedMatch => "http://www.w3.org/2004/02/skos/core#relatedMatch",
            AlignmentRelation::Related => "http://www.w3.org/2004/02/skos/core#related",
            AlignmentRelation::BroadMatch => "http://www.w3.org/2004/02/skos/core#broadMatch",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AlignmentRelation::SameAs => "sameAs",
            AlignmentRelation::CloseMatch => "closeMatch",
            AlignmentRelation::RelatedMatch => "relatedMatch",
            AlignmentRelation::Related => "related",
            AlignmentRelation::BroadMatch => "broadMatch",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        AlignmentRelation::ALL
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown alignment relation `{s}`")))
    }
}

/// One alignment link between two distinct match candidates, identified by
/// IRI so the link survives graph transformations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlignmentLink {
    pub source: String,
    pub target: String,
    pub relation: AlignmentRelation,
}

/// The seven predefined relation subsets for gold clusterings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringId {
    C0,
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
}

impl ClusteringId {
    pub const ALL: [ClusteringId; 7] = [
        ClusteringId::C0,
        ClusteringId::C1,
        ClusteringId::C2,
        ClusteringId::C3,
        ClusteringId::C4,
        ClusteringId::C5,
        ClusteringId::C6,
    ];

    pub fn relations(self) -> &'static [AlignmentRelation] {
        use AlignmentRelation::*;
        match self {
            ClusteringId::C0 => &[SameAs, CloseMatch, RelatedMatch, Related, BroadMatch],
            ClusteringId::C1 => &[SameAs, CloseMatch, RelatedMatch, Related],
            ClusteringId::C2 => &[SameAs],
            ClusteringId::C3 => &[CloseMatch],
            ClusteringId::C4 => &[RelatedMatch],
            ClusteringId::C5 => &[Related],
            ClusteringId::C6 => &[BroadMatch],
        }
    }
}

impl std::fmt::Display for ClusteringId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(&format!("c{}", *self as u8))
    }
}

impl std::str::FromStr for ClusteringId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClusteringId::ALL
            .into_iter()
            .find(|c| c.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parameter(format!("unknown gold clustering `{s}`")))
    }
}

/// A labeling of the match-candidate set S into connected-component clusters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldClustering {
    pub id: ClusteringId,
    pub relations: Vec<AlignmentRelation>,
    /// Dense labels over S, ordered by each component's smallest IRI.
    pub labels: BTreeMap<String, u32>,
    pub cluster_sizes: BTreeMap<u32, usize>,
}

impl GoldClustering {
    pub fn cluster_size_of(&self, iri: &str) -> Option<usize> {
        self.labels
            .get(iri)
            .and_then(|l| self.cluster_sizes.get(l))
            .copied()
    }

    pub fn label_of(&self, iri: &str) -> Option<u32> {
        self.labels.get(iri).copied()
    }
}

/// One cross-validation fold: disjoint train/validation/test candidate sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldSplit {
    /// 1-based fold index; fold k tests on part k and validates on part
    /// k+1 (part 1 when k = 5).
    pub fold: usize,
    pub train: BTreeSet<String>,
    pub val: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

/// Maps each alignment-relation predicate found in `g` to its relation.
pub fn alignment_predicates(g: &KnowledgeGraph) -> BTreeMap<PredId, AlignmentRelation> {
    AlignmentRelation::ALL
        .into_iter()
        .filter_map(|rel| g.pred_id(rel.iri()).map(|p| (p, rel)))
        .collect()
}

/// Removes all alignment triples between S-nodes from the graph and returns
/// them as typed links, deduplicated per undirected pair and relation.
/// Alignment-vocabulary triples with an endpoint outside S are retained
/// (sameAs among non-candidates feeds the contraction).
pub fn strip_alignments(
    g: &KnowledgeGraph,
    s_nodes: &BTreeSet<NodeId>,
    link_predicates: &BTreeMap<PredId, AlignmentRelation>,
) -> Result<(KnowledgeGraph, Vec<AlignmentLink>)> {
    let mut out = g.clone();
    let mut links = BTreeSet::new();
    let to_remove: Vec<_> = g
        .triples()
        .filter(|t| {
            link_predicates.contains_key(&t.predicate)
                && s_nodes.contains(&t.subject)
                && s_nodes.contains(&t.object)
        })
        .copied()
        .collect();
    for t in to_remove {
        out.remove(&t);
        if t.subject == t.object {
            continue;
        }
        let relation = link_predicates[&t.predicate];
        let a = g.node_iri(t.subject)?.to_string();
        let b = g.node_iri(t.object)?.to_string();
        let (source, target) = if a <= b { (a, b) } else { (b, a) };
        links.insert(AlignmentLink {
            source,
            target,
            relation,
        });
    }
    Ok((out, links.into_iter().collect()))
}

/// Labels S by the connected components of the undirected graph
/// (S, links of the selected relations). Isolated nodes form singletons.
pub fn compute_gold_clustering(
    links: &[AlignmentLink],
    id: ClusteringId,
    s: &BTreeSet<String>,
) -> GoldClustering {
    let selected: BTreeSet<AlignmentRelation> = id.relations().iter().copied().collect();
    let index: BTreeMap<&str, usize> = s
        .iter()
        .enumerate()
        .map(|(i, iri)| (iri.as_str(), i))
        .collect();
    let mut uf = UnionFind::new(s.len());
    for link in links {
        if !selected.contains(&link.relation) {
            continue;
        }
        let (Some(&a), Some(&b)) = (
            index.get(link.source.as_str()),
            index.get(link.target.as_str()),
        ) else {
            continue;
        };
        uf.union(a, b);
    }
    // S iterates in IRI order, so the first member seen for a root is the
    // component's smallest IRI; labels follow that order.
    let mut root_to_label: BTreeMap<usize, u32> = BTreeMap::new();
    let mut labels = BTreeMap::new();
    let mut cluster_sizes: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, iri) in s.iter().enumerate() {
        let root = uf.find(i);
        let next = root_to_label.len() as u32;
        let label = *root_to_label.entry(root).or_insert(next);
        labels.insert(iri.clone(), label);
        *cluster_sizes.entry(label).or_insert(0) += 1;
    }
    GoldClustering {
        id,
        relations: id.relations().to_vec(),
        labels,
        cluster_sizes,
    }
}

/// Nodes whose gold cluster has at least `threshold` members. Filtering is
/// all-or-nothing per cluster.
pub fn filter_min_size(gc: &GoldClustering, threshold: usize) -> BTreeSet<String> {
    gc.labels
        .iter()
        .filter(|(_, label)| gc.cluster_sizes.get(label).copied().unwrap_or(0) >= threshold)
        .map(|(iri, _)| iri.clone())
        .collect()
}

/// Splits S into five parts: clusters larger than 5 nodes are shuffled and
/// dealt round-robin from a seed-derived offset (so part sizes stay within
/// ±1 and remainders land on distinct parts); smaller clusters are assigned
/// uniformly at random. Part k is fold k's test set and part k+1 its
/// validation set.
pub fn split_folds(gc: &GoldClustering, seed: u64) -> Vec<FoldSplit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_label: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
    for (iri, &label) in &gc.labels {
        by_label.entry(label).or_default().push(iri.as_str());
    }
    let mut parts: Vec<BTreeSet<String>> = vec![BTreeSet::new(); 5];
    for members in by_label.values_mut() {
        if members.len() > 5 {
            members.shuffle(&mut rng);
            let offset = rng.random_range(0..5usize);
            for (i, iri) in members.iter().enumerate() {
                parts[(offset + i) % 5].insert((*iri).to_string());
            }
        } else {
            for iri in members.iter() {
                let part = rng.random_range(0..5usize);
                parts[part].insert((*iri).to_string());
            }
        }
    }
    (1..=5usize)
        .map(|k| {
            let test = parts[k - 1].clone();
            let val = parts[k % 5].clone();
            let train = parts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k - 1 && *i != k % 5)
                .flat_map(|(_, p)| p.iter().cloned())
                .collect();
            FoldSplit {
                fold: k,
                train,
                val,
                test,
            }
        })
        .collect()
}
