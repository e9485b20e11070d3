//! Deterministic generator of desk-scale synthetic knowledge graphs with
//! planted ground truth.
//!
//! The generated shape mirrors the aggregated-graph setting: relationship
//! nodes (the match candidates) are reified n-ary relations whose neighbors
//! are shared component entities of three roles (drug-like, gene-like,
//! phenotype-like). Entities are replicated across sources and the copies
//! are linked with sameAs chains, component predicates sit under a small
//! predicate hierarchy, entities are typed against class chains, and one
//! symmetric plus one declared-inverse predicate are planted so every
//! saturation rule has something to do.
//!
//! Relationship nodes come in clusters. Each cluster draws a core component
//! set; each member keeps a Bernoulli-thinned copy whose keep probability
//! depends on the member's relation tier, so strongly-related pairs share
//! strictly more neighbors than weakly-related ones. Planted alignment
//! links connect every cluster (a chain plus random extra pairs) and the
//! link relation is the weaker of the two members' tiers.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::{AlignmentLink, AlignmentRelation};
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, WellKnownIris};

pub const BASE: &str = "http://example.org/";
/// All relationship (match-candidate) IRIs start with this prefix.
pub const RELATIONSHIP_PREFIX: &str = "http://example.org/rel/";

const ROLES: [&str; 3] = ["drug", "gene", "phen"];
const ROLE_CLASSES: [&str; 3] = ["Drug", "Gene", "Phenotype"];
const ROLE_PREDICATES: [&str; 3] = ["hasDrug", "hasGene", "hasPhenotype"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_sources: usize,
    pub num_relationship_clusters: usize,
    /// Inclusive range of cluster sizes.
    pub cluster_size_range: (usize, usize),
    /// Pool size per role (drug-like, gene-like, phenotype-like).
    pub entities_per_role: [usize; 3],
    /// Core entities drawn per role for each cluster; cores are disjoint
    /// across clusters.
    pub core_entities_per_role: usize,
    /// Tier probabilities in relation order: sameAs, closeMatch,
    /// relatedMatch, related, broadMatch.
    pub relation_mix: [f64; 5],
    /// Probability of keeping each core entity, per tier (the
    /// neighbor-overlap knob; the broadMatch tier always keeps the full
    /// core and adds one private extra).
    pub keep_probabilities: [f64; 5],
    /// Probability of an extra planted link per intra-cluster pair, on top
    /// of the connecting chain.
    pub intra_link_density: f64,
    /// Depth of the class and predicate hierarchies above the leaves.
    pub ontology_depth: usize,
    /// Probability that an entity has a duplicate in each non-home source.
    pub sameas_duplicate_rate: f64,
    pub noise_edges: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_sources: 3,
            num_relationship_clusters: 8,
            cluster_size_range: (12, 12),
            entities_per_role: [30, 30, 30],
            core_entities_per_role: 2,
            relation_mix: [0.30, 0.25, 0.20, 0.15, 0.10],
            keep_probabilities: [1.0, 0.85, 0.65, 0.5, 1.0],
            intra_link_density: 0.35,
            ontology_depth: 2,
            sameas_duplicate_rate: 0.35,
            noise_edges: 12,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_sources == 0
            || self.num_relationship_clusters == 0
            || self.cluster_size_range.0 == 0
        {
            return Err(Error::Config("counts must be positive".into()));
        }
        if self.cluster_size_range.0 > self.cluster_size_range.1 {
            return Err(Error::Config("empty cluster size range".into()));
        }
        let mix: f64 = self.relation_mix.iter().sum();
        if (mix - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "relation mix sums to {mix}, expected 1"
            )));
        }
        for (role, &pool) in ROLES.iter().zip(&self.entities_per_role) {
            let needed = self.core_entities_per_role * self.num_relationship_clusters;
            if needed > pool {
                return Err(Error::Config(format!(
                    "clusters need {needed} distinct {role} entities, pool has {pool}"
                )));
            }
        }
        Ok(())
    }
}

/// One planted schema axiom, for auditability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomRecord {
    pub kind: String,
    pub subject: String,
    pub object: String,
}

/// Everything the generator knows about the graph it emitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthLedger {
    pub links: Vec<AlignmentLink>,
    /// Planted cluster index per relationship IRI.
    pub cluster_labels: BTreeMap<String, u32>,
    /// Duplicate entity copy -> home copy.
    pub duplicate_map: BTreeMap<String, String>,
    pub axioms: Vec<AxiomRecord>,
}

/// Relation tiers ordered by decreasing strength for pair-relation
/// derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tier {
    SameAs,
    CloseMatch,
    RelatedMatch,
    Related,
    BroadMatch,
}

const TIERS: [Tier; 5] = [
    Tier::SameAs,
    Tier::CloseMatch,
    Tier::RelatedMatch,
    Tier::Related,
    Tier::BroadMatch,
];

/// The weaker of two members' tiers decides their link relation. A
/// broad-tier member holds a strict superset of the full core, so pairing
/// it with a full-core or near-full member yields broadMatch.
fn pair_relation(a: Tier, b: Tier) -> AlignmentRelation {
    use Tier::*;
    if a == Related || b == Related {
        return AlignmentRelation::Related;
    }
    if a == RelatedMatch || b == RelatedMatch {
        return AlignmentRelation::RelatedMatch;
    }
    match (a, b) {
        (BroadMatch, BroadMatch) => AlignmentRelation::CloseMatch,
        (BroadMatch, _) | (_, BroadMatch) => AlignmentRelation::BroadMatch,
        (SameAs, SameAs) => AlignmentRelation::SameAs,
        _ => AlignmentRelation::CloseMatch,
    }
}

struct EntityCopies {
    /// IRI per source where a copy exists; always contains the home source.
    by_source: BTreeMap<usize, String>,
    home: usize,
}

impl EntityCopies {
    fn copy_for(&self, source: usize) -> &str {
        self.by_source
            .get(&source)
            .unwrap_or(&self.by_source[&self.home])
    }
}

/// Generates the graph and its ground-truth ledger. Identical config and
/// seed give a byte-identical serialization.
pub fn generate(config: &SynthConfig) -> Result<(KnowledgeGraph, GroundTruthLedger)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = KnowledgeGraph::new();
    let wk = WellKnownIris::default();
    let mut axioms = Vec::new();

    // class chains per role plus the relationship class
    let class_leaf: Vec<String> = ROLE_CLASSES
        .iter()
        .map(|c| format!("{BASE}onto/{c}"))
        .collect();
    for (role, leaf) in ROLE_CLASSES.iter().zip(&class_leaf) {
        let mut below = leaf.clone();
        for level in 1..=config.ontology_depth {
            let above = format!("{BASE}onto/{role}Ancestor{level}");
            g.add(&below, &wk.subclass_of, &above);
            axioms.push(AxiomRecord {
                kind: "subClassOf".into(),
                subject: below.clone(),
                object: above.clone(),
            });
            below = above;
        }
    }
    let relationship_class = format!("{BASE}onto/Relationship");

    // predicate chain shared by the three component predicates
    let role_preds: Vec<String> = ROLE_PREDICATES
        .iter()
        .map(|p| format!("{BASE}vocab/{p}"))
        .collect();
    let mut super_chain = Vec::new();
    for level in 1..=config.ontology_depth {
        super_chain.push(format!("{BASE}vocab/involves{level}"));
    }
    for pred in &role_preds {
        let mut below = pred.clone();
        for above in &super_chain {
            g.add(&below, &wk.subproperty_of, above);
            axioms.push(AxiomRecord {
                kind: "subPropertyOf".into(),
                subject: below.clone(),
                object: above.clone(),
            });
            below = above.clone();
        }
    }

    // one symmetric and one declared-inverse predicate
    let interacts = format!("{BASE}vocab/interactsWith");
    g.add(&interacts, &wk.rdf_type, &wk.symmetric_class);
    axioms.push(AxiomRecord {
        kind: "symmetric".into(),
        subject: interacts.clone(),
        object: wk.symmetric_class.clone(),
    });
    let produces = format!("{BASE}vocab/produces");
    let produced_by = format!("{BASE}vocab/producedBy");
    g.add(&produces, &wk.inverse_of, &produced_by);
    axioms.push(AxiomRecord {
        kind: "inverseOf".into(),
        subject: produces.clone(),
        object: produced_by.clone(),
    });

    // entity pools with cross-source duplicates chained by sameAs
    let mut duplicate_map = BTreeMap::new();
    let mut entities: Vec<Vec<EntityCopies>> = Vec::new();
    for (role_idx, role) in ROLES.iter().enumerate() {
        let mut pool = Vec::new();
        for e in 0..config.entities_per_role[role_idx] {
            let home = e % config.num_sources;
            let mut by_source = BTreeMap::new();
            by_source.insert(home, format!("{BASE}src{home}/{role}{e:03}"));
            for s in 0..config.num_sources {
                if s != home && rng.random_range(0.0..1.0) < config.sameas_duplicate_rate {
                    by_source.insert(s, format!("{BASE}src{s}/{role}{e:03}"));
                }
            }
            let home_iri = by_source[&home].clone();
            let copies: Vec<&String> = by_source.values().collect();
            for window in copies.windows(2) {
                g.add(window[0], &wk.same_as, window[1]);
            }
            for copy in &copies {
                g.add(copy, &wk.rdf_type, &class_leaf[role_idx]);
                if *copy != &home_iri {
                    duplicate_map.insert((*copy).clone(), home_iri.clone());
                }
            }
            pool.push(EntityCopies { by_source, home });
        }
        entities.push(pool);
    }

    // disjoint cluster cores per role
    let mut core_picks: Vec<Vec<usize>> = Vec::new();
    for role_idx in 0..ROLES.len() {
        let mut indices: Vec<usize> = (0..config.entities_per_role[role_idx]).collect();
        indices.shuffle(&mut rng);
        core_picks.push(indices);
    }

    let mut cluster_labels = BTreeMap::new();
    let mut links = Vec::new();
    let mut relationship_iris = Vec::new();
    for c in 0..config.num_relationship_clusters {
        let size = rng.random_range(config.cluster_size_range.0..=config.cluster_size_range.1);
        // the cluster core: role-wise slices of the shuffled pools
        let mut core: Vec<(usize, usize)> = Vec::new(); // (role, entity index)
        for (role_idx, picks) in core_picks.iter().enumerate() {
            let start = c * config.core_entities_per_role;
            for k in 0..config.core_entities_per_role {
                core.push((role_idx, picks[start + k]));
            }
        }
        let mut tiers = Vec::with_capacity(size);
        for m in 0..size {
            let source = m % config.num_sources;
            let iri = format!("{RELATIONSHIP_PREFIX}c{c:02}_s{source}_m{m:02}");
            let tier = if m == 0 {
                Tier::SameAs // anchor holds the full core
            } else {
                draw_tier(&mut rng, &config.relation_mix)
            };
            tiers.push(tier);
            cluster_labels.insert(iri.clone(), c as u32);
            g.add(&iri, &wk.rdf_type, &relationship_class);

            let mut kept: Vec<(usize, usize)> = match tier {
                Tier::BroadMatch => core.clone(),
                _ => {
                    let keep_p = config.keep_probabilities[TIERS
                        .iter()
                        .position(|&t| t == tier)
                        .expect("tier is in the table")];
                    let picked: Vec<(usize, usize)> = core
                        .iter()
                        .filter(|_| rng.random_range(0.0..1.0) < keep_p)
                        .copied()
                        .collect();
                    if picked.is_empty() {
                        vec![core[rng.random_range(0..core.len())]]
                    } else {
                        picked
                    }
                }
            };
            if tier == Tier::BroadMatch {
                // one private extra makes the neighbor set a strict superset
                let role_idx = rng.random_range(0..ROLES.len());
                let free_region = config.core_entities_per_role * config.num_relationship_clusters;
                let pool = &core_picks[role_idx];
                let extra = if free_region < pool.len() {
                    pool[rng.random_range(free_region..pool.len())]
                } else {
                    pool[rng.random_range(0..pool.len())]
                };
                kept.push((role_idx, extra));
            }
            for (role_idx, entity_idx) in kept {
                let copy = entities[role_idx][entity_idx].copy_for(source);
                g.add(&iri, &role_preds[role_idx], copy);
            }
            relationship_iris.push(iri);
        }
        // connecting chain plus random extra pairs
        let base_idx = relationship_iris.len() - size;
        for m in 1..size {
            let partner = rng.random_range(0..m);
            push_link(
                &mut links,
                &relationship_iris,
                base_idx,
                m,
                partner,
                &tiers,
            );
        }
        for i in 0..size {
            for j in (i + 1)..size {
                if rng.random_range(0.0..1.0) < config.intra_link_density {
                    push_link(&mut links, &relationship_iris, base_idx, j, i, &tiers);
                }
            }
        }
    }
    // dedup links planted twice (chain + density draw)
    let link_set: BTreeSet<AlignmentLink> = links.into_iter().collect();
    let links: Vec<AlignmentLink> = link_set.into_iter().collect();
    for link in &links {
        g.add(&link.source, link.relation.iri(), &link.target);
    }

    // a few entity-entity edges for the symmetric and inverse predicates
    for _ in 0..config.num_relationship_clusters {
        let d1 = pick_copy(&mut rng, &entities[0]);
        let d2 = pick_copy(&mut rng, &entities[0]);
        if d1 != d2 {
            g.add(&d1, &interacts, &d2);
        }
        let gene = pick_copy(&mut rng, &entities[1]);
        let phen = pick_copy(&mut rng, &entities[2]);
        g.add(&gene, &produces, &phen);
    }

    // noise: random extra component references
    for _ in 0..config.noise_edges {
        let member = &relationship_iris[rng.random_range(0..relationship_iris.len())];
        let role_idx = rng.random_range(0..ROLES.len());
        let entity = &entities[role_idx][rng.random_range(0..entities[role_idx].len())];
        let copy = entity.by_source[&entity.home].clone();
        g.add(member, &role_preds[role_idx], &copy);
    }

    Ok((
        g,
        GroundTruthLedger {
            links,
            cluster_labels,
            duplicate_map,
            axioms,
        },
    ))
}

fn draw_tier(rng: &mut ChaCha8Rng, mix: &[f64; 5]) -> Tier {
    let roll: f64 = rng.random_range(0.0..1.0);
    let mut acc = 0.0;
    for (tier, &p) in TIERS.iter().zip(mix) {
        acc += p;
        if roll < acc {
            return *tier;
        }
    }
    Tier::BroadMatch
}

fn push_link(
    links: &mut Vec<AlignmentLink>,
    iris: &[String],
    base: usize,
    member: usize,
    partner: usize,
    tiers: &[Tier],
) {
    let relation = pair_relation(tiers[member], tiers[partner]);
    // broadMatch points from the more specific member (the superset holder)
    let (s, t) = if relation == AlignmentRelation::BroadMatch
        && tiers[partner] == Tier::BroadMatch
    {
        (partner, member)
    } else {
        (member, partner)
    };
    links.push(AlignmentLink {
        source: iris[base + s].clone(),
        target: iris[base + t].clone(),
        relation,
    });
}

fn pick_copy(rng: &mut ChaCha8Rng, pool: &[EntityCopies]) -> String {
    let e = &pool[rng.random_range(0..pool.len())];
    e.by_source[&e.home].clone()
}

/// The match-candidate IRIs of a generated graph.
pub fn candidate_set(g: &KnowledgeGraph) -> BTreeSet<String> {
    g.node_ids_iter()
        .filter_map(|id| {
            let iri = g.node_iri(id).ok()?;
            iri.starts_with(RELATIONSHIP_PREFIX).then(|| iri.to_string())
        })
        .collect()
}
