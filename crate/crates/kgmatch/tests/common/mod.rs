//! Independent oracles shared by the integration and acceptance suites.
//!
//! Everything here recomputes expected values from first principles,
//! deliberately avoiding the implementation paths it checks: rules fire
//! one step at a time until nothing changes, agglomeration rescans the
//! full distance matrix, assignments are enumerated, and gradients come
//! from central finite differences.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array2, ArrayView2};
use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kgmatch::gcn::{forward_with_tape, EncodedGraph, GcnConfig, GcnParams};
use kgmatch::graph::KnowledgeGraph;
use kgmatch::saturation::{VariantTag, INVERSE_SUFFIX};
use kgmatch::training::{snn_loss, SnnBatch};

pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const SUBCLASS: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const SUBPROP: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
pub const INVERSE_OF: &str = "http://www.w3.org/2002/07/owl#inverseOf";
pub const SYMMETRIC: &str = "http://www.w3.org/2002/07/owl#SymmetricProperty";
pub const SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";

pub type STriple = (String, String, String);

pub fn graph_to_striples(g: &KnowledgeGraph) -> BTreeSet<STriple> {
    g.triples()
        .map(|t| {
            (
                g.node_iri(t.subject).unwrap().to_string(),
                g.pred_iri(t.predicate).unwrap().to_string(),
                g.node_iri(t.object).unwrap().to_string(),
            )
        })
        .collect()
}

/// Naive fire-until-fixpoint reference for `build_variant`: sameAs
/// contraction once up front, then single-step closure/completion rules
/// with the schema re-read from the current triples every pass, then
/// abstract inverses over the used predicates.
pub fn oracle_build_variant(input: &BTreeSet<STriple>, tag: VariantTag) -> BTreeSet<STriple> {
    let flags = tag.flags();
    let mut triples: BTreeSet<STriple> = input.clone();

    if flags.contract_sameas {
        // union-find over IRIs through undirected sameAs edges
        let mut rep: BTreeMap<String, String> = BTreeMap::new();
        let find = |rep: &mut BTreeMap<String, String>, start: &str| -> String {
            let mut cur = start.to_string();
            while let Some(next) = rep.get(&cur) {
                if *next == cur {
                    break;
                }
                cur = next.clone();
            }
            cur
        };
        for (s, p, o) in triples.iter() {
            if p == SAME_AS {
                let rs = find(&mut rep, s);
                let ro = find(&mut rep, o);
                let (small, large) = if rs <= ro { (rs, ro) } else { (ro, rs) };
                rep.insert(large, small.clone());
                rep.entry(small.clone()).or_insert(small);
            }
        }
        let mut mapped = BTreeSet::new();
        for (s, p, o) in triples.iter() {
            if p == SAME_AS {
                continue;
            }
            let ms = find(&mut rep, s);
            let mo = find(&mut rep, o);
            if ms == mo && s != o {
                continue; // contraction-induced self-loop
            }
            mapped.insert((ms, p.clone(), mo));
        }
        triples = mapped;
    }

    if flags.close_predicates || flags.close_classes || flags.inverse_symmetry_semantics {
        loop {
            let mut additions: BTreeSet<STriple> = BTreeSet::new();
            let subprops: BTreeSet<(String, String)> = triples
                .iter()
                .filter(|(_, p, _)| p == SUBPROP)
                .map(|(s, _, o)| (s.clone(), o.clone()))
                .collect();
            let subclasses: BTreeSet<(String, String)> = triples
                .iter()
                .filter(|(_, p, _)| p == SUBCLASS)
                .map(|(s, _, o)| (s.clone(), o.clone()))
                .collect();
            let (symmetric, pairs) = oracle_schema(&triples);
            for (s, p, o) in triples.iter() {
                if flags.close_predicates {
                    for (sub, sup) in &subprops {
                        if p == sub {
                            additions.insert((s.clone(), sup.clone(), o.clone()));
                        }
                    }
                }
                if flags.close_classes && p == TYPE {
                    for (sub, sup) in &subclasses {
                        if o == sub {
                            additions.insert((s.clone(), TYPE.to_string(), sup.clone()));
                        }
                    }
                }
                if flags.inverse_symmetry_semantics {
                    if symmetric.contains(p) {
                        additions.insert((o.clone(), p.clone(), s.clone()));
                    }
                    for (a, b) in &pairs {
                        if p == a {
                            additions.insert((o.clone(), b.clone(), s.clone()));
                        }
                        if p == b {
                            additions.insert((o.clone(), a.clone(), s.clone()));
                        }
                    }
                }
            }
            let before = triples.len();
            triples.extend(additions);
            if triples.len() == before {
                break;
            }
        }
    }

    // abstract inverses over the used predicates, with the declared
    // exemptions when inverse/symmetry semantics are on
    let (symmetric, pairs) = oracle_schema(&triples);
    let mut exempt: BTreeSet<String> = BTreeSet::new();
    if flags.inverse_symmetry_semantics {
        exempt.extend(symmetric);
        for (a, b) in pairs {
            exempt.insert(a);
            exempt.insert(b);
        }
    }
    let used: BTreeSet<String> = triples.iter().map(|(_, p, _)| p.clone()).collect();
    let mut inverses = BTreeSet::new();
    for (s, p, o) in triples.iter() {
        if !exempt.contains(p) && used.contains(p) {
            inverses.insert((o.clone(), format!("{p}{INVERSE_SUFFIX}"), s.clone()));
        }
    }
    triples.extend(inverses);
    triples
}

fn oracle_schema(triples: &BTreeSet<STriple>) -> (BTreeSet<String>, BTreeSet<(String, String)>) {
    let mut symmetric: BTreeSet<String> = triples
        .iter()
        .filter(|(_, p, o)| p == TYPE && o == SYMMETRIC)
        .map(|(s, _, _)| s.clone())
        .collect();
    let mut pairs = BTreeSet::new();
    for (s, p, o) in triples.iter() {
        if p == INVERSE_OF {
            if s == o {
                symmetric.insert(s.clone());
            } else {
                let (a, b) = if s <= o { (s, o) } else { (o, s) };
                pairs.insert((a.clone(), b.clone()));
            }
        }
    }
    (symmetric, pairs)
}

/// A random graph with random schema axioms (cycles included), built so
/// no predicate is declared both symmetric and half of an inverse pair.
pub fn random_schema_graph(rng: &mut ChaCha8Rng) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    let entities: Vec<String> = (0..rng.random_range(5..12usize))
        .map(|i| format!("http://t/e{i}"))
        .collect();
    let preds: Vec<String> = (0..rng.random_range(3..7usize))
        .map(|i| format!("http://t/p{i}"))
        .collect();
    let classes: Vec<String> = (0..rng.random_range(2..6usize))
        .map(|i| format!("http://t/C{i}"))
        .collect();

    let plain = rng.random_range(5..30usize);
    for _ in 0..plain {
        let s = entities.choose(rng).unwrap();
        let p = preds.choose(rng).unwrap();
        let o = entities.choose(rng).unwrap();
        g.add(s, p, o);
    }
    for _ in 0..rng.random_range(0..4usize) {
        let e = entities.choose(rng).unwrap();
        let c = classes.choose(rng).unwrap();
        g.add(e, TYPE, c);
    }
    for _ in 0..rng.random_range(0..4usize) {
        let a = classes.choose(rng).unwrap();
        let b = classes.choose(rng).unwrap();
        g.add(a, SUBCLASS, b); // self and cyclic axioms allowed
    }
    for _ in 0..rng.random_range(0..4usize) {
        let a = preds.choose(rng).unwrap();
        let b = preds.choose(rng).unwrap();
        g.add(a, SUBPROP, b);
    }
    // occasionally a predicate whose closure target is itself an axiom
    // predicate, exercising schema re-extraction mid-fixpoint
    if rng.random_range(0.0..1.0) < 0.15 {
        let p = preds.choose(rng).unwrap();
        g.add(p, SUBPROP, SUBCLASS);
    }
    if rng.random_range(0.0..1.0) < 0.1 {
        let p = preds.choose(rng).unwrap();
        g.add(p, SUBPROP, SAME_AS);
    }
    for _ in 0..rng.random_range(0..3usize) {
        let a = entities.choose(rng).unwrap();
        let b = entities.choose(rng).unwrap();
        if a != b {
            g.add(a, SAME_AS, b);
        }
    }
    // declarations: symmetric and inverse-paired predicates kept disjoint
    let mut declared: BTreeSet<usize> = BTreeSet::new();
    for (i, p) in preds.iter().enumerate() {
        if rng.random_range(0.0..1.0) < 0.2 {
            g.add(p, TYPE, SYMMETRIC);
            declared.insert(i);
        }
    }
    let free: Vec<usize> = (0..preds.len()).filter(|i| !declared.contains(i)).collect();
    if free.len() >= 2 && rng.random_range(0.0..1.0) < 0.5 {
        g.add(&preds[free[0]], INVERSE_OF, &preds[free[1]]);
    }
    if free.len() >= 3 && rng.random_range(0.0..1.0) < 0.2 {
        // self-inverse counts as symmetry, not a conflict
        g.add(&preds[free[2]], INVERSE_OF, &preds[free[2]]);
    }
    g
}

/// Naive full-rescan agglomeration with Lance-Williams updates on squared
/// distances; lowest (i, j) slot pair wins among equal minima.
pub fn naive_agglomerate(points: &ArrayView2<f64>, k: usize, ward: bool) -> Vec<u32> {
    let n = points.nrows();
    assert!(k >= 1 && k <= n);
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut d = 0.0;
            for c in 0..points.ncols() {
                let diff = points[(i, c)] - points[(j, c)];
                d += diff * diff;
            }
            dist[i][j] = d;
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut size = vec![1usize; n];
    let mut membership: Vec<usize> = (0..n).collect();
    for _ in 0..(n - k) {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if active[j] && dist[i][j] < best.0 {
                    best = (dist[i][j], i, j);
                }
            }
        }
        let (d_ab, a, b) = best;
        active[b] = false;
        for m in membership.iter_mut() {
            if *m == b {
                *m = a;
            }
        }
        for m in 0..n {
            if !active[m] || m == a {
                continue;
            }
            let updated = if ward {
                let (na, nb, nm) = (size[a] as f64, size[b] as f64, size[m] as f64);
                ((na + nm) * dist[a][m] + (nb + nm) * dist[b][m] - nm * d_ab) / (na + nb + nm)
            } else {
                dist[a][m].min(dist[b][m])
            };
            dist[a][m] = updated;
            dist[m][a] = updated;
        }
        size[a] += size[b];
    }
    let mut label_of = BTreeMap::new();
    membership
        .iter()
        .map(|slot| {
            let next = label_of.len() as u32;
            *label_of.entry(*slot).or_insert(next)
        })
        .collect()
}

/// Single linkage via the Euclidean minimum spanning tree: grow the tree
/// with Prim, cut the k-1 heaviest edges, label the components.
#[allow(clippy::needless_range_loop)]
pub fn mst_single_linkage(points: &ArrayView2<f64>, k: usize) -> Vec<u32> {
    let n = points.nrows();
    assert!(k >= 1 && k <= n);
    let sq = |i: usize, j: usize| -> f64 {
        let mut d = 0.0;
        for c in 0..points.ncols() {
            let diff = points[(i, c)] - points[(j, c)];
            d += diff * diff;
        }
        d
    };
    let mut in_tree = vec![false; n];
    let mut best_dist = vec![f64::INFINITY; n];
    let mut best_from = vec![0usize; n];
    in_tree[0] = true;
    for j in 1..n {
        best_dist[j] = sq(0, j);
    }
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick = usize::MAX;
        let mut pick_d = f64::INFINITY;
        for j in 0..n {
            if !in_tree[j] && best_dist[j] < pick_d {
                pick_d = best_dist[j];
                pick = j;
            }
        }
        in_tree[pick] = true;
        edges.push((pick_d, best_from[pick], pick));
        for j in 0..n {
            if !in_tree[j] {
                let d = sq(pick, j);
                if d < best_dist[j] {
                    best_dist[j] = d;
                    best_from[j] = pick;
                }
            }
        }
    }
    edges.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for &(_, a, b) in edges.iter().skip(k - 1) {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label_of = BTreeMap::new();
    (0..n)
        .map(|p| {
            let root = find(&mut parent, p);
            let next = label_of.len() as u32;
            *label_of.entry(root).or_insert(next)
        })
        .collect()
}

/// Quadratic OPTICS reference: repeatedly take the unprocessed point with
/// the smallest (reachability, index) and relax every other unprocessed
/// point.
pub fn optics_reference(points: &ArrayView2<f64>, min_samples: usize) -> (Vec<usize>, Vec<f64>) {
    let n = points.nrows();
    let dist = |i: usize, j: usize| -> f64 {
        let mut d = 0.0;
        for c in 0..points.ncols() {
            let diff = points[(i, c)] - points[(j, c)];
            d += diff * diff;
        }
        d.sqrt()
    };
    let core: Vec<f64> = (0..n)
        .map(|i| {
            if n < min_samples {
                return f64::INFINITY;
            }
            let mut ds: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist(i, j)).collect();
            ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ds[min_samples - 2]
        })
        .collect();
    let mut processed = vec![false; n];
    let mut reach = vec![f64::INFINITY; n];
    let mut order = Vec::with_capacity(n);
    let mut order_reach = Vec::with_capacity(n);
    for _ in 0..n {
        let mut pick = usize::MAX;
        for j in 0..n {
            if processed[j] {
                continue;
            }
            if pick == usize::MAX || reach[j] < reach[pick] {
                pick = j;
            }
        }
        processed[pick] = true;
        order.push(pick);
        order_reach.push(reach[pick]);
        if core[pick].is_finite() {
            for j in 0..n {
                if !processed[j] {
                    let candidate = core[pick].max(dist(pick, j));
                    if candidate < reach[j] {
                        reach[j] = candidate;
                    }
                }
            }
        }
    }
    (order, order_reach)
}

/// Best accuracy over every injective mapping between the (padded) label
/// sets, by explicit permutation enumeration. Only usable for small label
/// counts.
pub fn exhaustive_accuracy(pred: &[u32], gold: &[u32]) -> f64 {
    let pred_labels: Vec<u32> = {
        let s: BTreeSet<u32> = pred.iter().copied().collect();
        s.into_iter().collect()
    };
    let gold_labels: Vec<u32> = {
        let s: BTreeSet<u32> = gold.iter().copied().collect();
        s.into_iter().collect()
    };
    let side = pred_labels.len().max(gold_labels.len());
    assert!(side <= 7, "exhaustive search needs few labels");
    let mut slots: Vec<usize> = (0..side).collect();
    let mut best = 0usize;
    permute(&mut slots, 0, &mut |perm| {
        let mut matches = 0usize;
        for (&p, &g) in pred.iter().zip(gold) {
            let pi = pred_labels.iter().position(|&l| l == p).unwrap();
            let gi = gold_labels.iter().position(|&l| l == g);
            if let Some(gi) = gi {
                if perm[pi] == gi {
                    matches += 1;
                }
            }
        }
        best = best.max(matches);
    });
    best as f64 / pred.len() as f64
}

fn permute(slots: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == slots.len() {
        visit(slots);
        return;
    }
    for i in at..slots.len() {
        slots.swap(at, i);
        permute(slots, at + 1, visit);
        slots.swap(at, i);
    }
}

/// ARI from explicit pair counting, using the 2x2 pair-confusion identity.
pub fn pair_counting_ari(pred: &[u32], gold: &[u32]) -> f64 {
    let n = pred.len();
    let (mut a, mut b, mut c, mut d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            let same_gold = gold[i] == gold[j];
            let same_pred = pred[i] == pred[j];
            match (same_gold, same_pred) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    let denominator = (a + b) * (b + d) + (a + c) * (c + d);
    if denominator == 0.0 {
        let identical = {
            let canon = |ls: &[u32]| -> Vec<usize> {
                let mut map = BTreeMap::new();
                ls.iter()
                    .map(|&l| {
                        let next = map.len();
                        *map.entry(l).or_insert(next)
                    })
                    .collect()
            };
            canon(pred) == canon(gold)
        };
        return if identical { 1.0 } else { 0.0 };
    }
    2.0 * (a * d - b * c) / denominator
}

/// NMI from probabilities, summed in a different order than the
/// implementation.
pub fn direct_nmi(pred: &[u32], gold: &[u32]) -> f64 {
    let n = pred.len() as f64;
    let mut joint: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut pg: BTreeMap<u32, f64> = BTreeMap::new();
    let mut pp: BTreeMap<u32, f64> = BTreeMap::new();
    for (&p, &g) in pred.iter().zip(gold) {
        *joint.entry((g, p)).or_insert(0.0) += 1.0;
        *pg.entry(g).or_insert(0.0) += 1.0;
        *pp.entry(p).or_insert(0.0) += 1.0;
    }
    let mut mi = 0.0;
    for (&(g, p), &count) in &joint {
        let pj = count / n;
        mi += pj * (pj / ((pg[&g] / n) * (pp[&p] / n))).ln();
    }
    let h = |m: &BTreeMap<u32, f64>| -> f64 {
        m.values()
            .map(|&c| {
                let p = c / n;
                -p * p.ln()
            })
            .sum()
    };
    let mean = 0.5 * (h(&pg) + h(&pp));
    if mean == 0.0 {
        return 1.0;
    }
    mi / mean
}

/// Flat access to every parameter entry of a layer stack; component index
/// runs over the bases, then the coefficients, then the self weight.
fn component_count(layers: &[kgmatch::gcn::LayerParams], l: usize) -> usize {
    layers[l].bases.len() + 2
}

fn component_len(layers: &[kgmatch::gcn::LayerParams], l: usize, c: usize) -> usize {
    let layer = &layers[l];
    if c < layer.bases.len() {
        layer.bases[c].len()
    } else if c == layer.bases.len() {
        layer.coeffs.len()
    } else {
        layer.self_weight.len()
    }
}

fn component_get(layers: &[kgmatch::gcn::LayerParams], l: usize, c: usize, idx: usize) -> f64 {
    let layer = &layers[l];
    if c < layer.bases.len() {
        layer.bases[c].as_slice().unwrap()[idx]
    } else if c == layer.bases.len() {
        layer.coeffs.as_slice().unwrap()[idx]
    } else {
        layer.self_weight.as_slice().unwrap()[idx]
    }
}

fn component_set(layers: &mut [kgmatch::gcn::LayerParams], l: usize, c: usize, idx: usize, v: f64) {
    let layer = &mut layers[l];
    if c < layer.bases.len() {
        layer.bases[c].as_slice_mut().unwrap()[idx] = v;
    } else if c == layer.bases.len() {
        layer.coeffs.as_slice_mut().unwrap()[idx] = v;
    } else {
        layer.self_weight.as_slice_mut().unwrap()[idx] = v;
    }
}

/// Central finite differences of the batch loss with respect to every
/// parameter entry and rho. Panics on the first entry outside tolerance;
/// returns how many entries were checked and the worst relative error.
pub struct FiniteDiff {
    pub step: f64,
    pub rel_tol: f64,
    pub abs_floor: f64,
}

impl FiniteDiff {
    /// Returns (entries checked, worst relative error, largest analytic
    /// gradient magnitude). The caller should assert the last one is well
    /// away from zero, otherwise the comparison would be vacuous.
    pub fn check(
        &self,
        graph: &EncodedGraph,
        params: &GcnParams,
        config: &GcnConfig,
        batch: &SnnBatch,
        rho: f64,
        analytic: &kgmatch::training::Gradients,
    ) -> (usize, f64, f64) {
        let loss_of = |params: &GcnParams, rho: f64| -> f64 {
            let tape = forward_with_tape(graph, params, config).unwrap();
            snn_loss(tape.output(), batch, rho).unwrap()
        };
        let mut checked = 0usize;
        let mut worst: f64 = 0.0;
        let mut largest_analytic: f64 = 0.0;
        let mut assert_close = |a: f64, numeric: f64, what: &str| {
            let denom = a.abs().max(numeric.abs());
            let diff = (a - numeric).abs();
            let rel = if denom > 0.0 { diff / denom } else { 0.0 };
            largest_analytic = largest_analytic.max(a.abs());
            if diff >= self.abs_floor {
                worst = worst.max(rel);
            }
            assert!(
                rel < self.rel_tol || diff < self.abs_floor,
                "{what}: analytic {a} vs numeric {numeric} (rel {rel:.3e})"
            );
            checked += 1;
        };
        let mut work = params.clone();
        for l in 0..3 {
            for c in 0..component_count(&params.layers, l) {
                for idx in 0..component_len(&params.layers, l, c) {
                    let original = component_get(&work.layers, l, c, idx);
                    component_set(&mut work.layers, l, c, idx, original + self.step);
                    let up = loss_of(&work, rho);
                    component_set(&mut work.layers, l, c, idx, original - self.step);
                    let down = loss_of(&work, rho);
                    component_set(&mut work.layers, l, c, idx, original);
                    let numeric = (up - down) / (2.0 * self.step);
                    let a = component_get(&analytic.layers, l, c, idx);
                    assert_close(a, numeric, &format!("layer {l} component {c} [{idx}]"));
                }
            }
        }
        let numeric = (loss_of(params, rho + self.step) - loss_of(params, rho - self.step))
            / (2.0 * self.step);
        assert_close(analytic.rho, numeric, "rho");
        let _ = assert_close;
        (checked, worst, largest_analytic)
    }
}

/// A random connected-ish labeled graph plus a loss batch over labeled
/// candidate nodes, for gradient checking.
pub struct GradCheckInstance {
    pub graph: KnowledgeGraph,
    pub encoded: EncodedGraph,
    pub batch: SnnBatch,
}

pub fn random_gradcheck_instance(rng: &mut ChaCha8Rng, max_nodes: usize) -> GradCheckInstance {
    let n = rng.random_range(8..=max_nodes);
    let preds: Vec<String> = (0..rng.random_range(2..=5usize))
        .map(|i| format!("http://t/p{i}"))
        .collect();
    let mut graph = KnowledgeGraph::new();
    let node = |i: usize| format!("http://t/n{i:02}");
    for i in 1..n {
        // spanning chain keeps most nodes connected
        let j = rng.random_range(0..i);
        graph.add(&node(i), preds.choose(rng).unwrap(), &node(j));
    }
    for _ in 0..n {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            graph.add(&node(a), preds.choose(rng).unwrap(), &node(b));
        }
    }
    let labels = rng.random_range(2..=4usize);
    // two nodes per label guarantee every batch member has a peer
    let mut members = Vec::new();
    let mut ids: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    ids.shuffle(rng);
    for (slot, &id) in ids.iter().take(labels * 2).enumerate() {
        members.push((
            graph.node_id(&node(id)).unwrap().idx(),
            (slot % labels) as u32,
        ));
    }
    let encoded = EncodedGraph::from_graph(&graph);
    GradCheckInstance {
        graph,
        encoded,
        batch: SnnBatch::new(members).unwrap(),
    }
}

/// Dense reference forward pass: explicit one-hot input and dense
/// normalized adjacency matrices.
#[allow(clippy::needless_range_loop)]
pub fn dense_forward(
    g: &KnowledgeGraph,
    params: &GcnParams,
    config: &GcnConfig,
) -> Vec<Array2<f64>> {
    let n = g.node_count();
    let r_count = g.predicate_count();
    let mut adjacency: Vec<Array2<f64>> = vec![Array2::zeros((n, n)); r_count];
    for id in g.node_ids_iter() {
        for r in g.pred_ids_iter() {
            let neighbors = g.neighbors(id, r).unwrap();
            if neighbors.is_empty() {
                continue;
            }
            let c = neighbors.len() as f64;
            for &j in neighbors {
                adjacency[r.idx()][(id.idx(), j.idx())] = 1.0 / c;
            }
        }
    }
    let mut h: Array2<f64> = Array2::eye(n);
    let mut out = Vec::new();
    for l in 0..3 {
        let layer = &params.layers[l];
        let mut z: Array2<f64> = h.dot(&layer.self_weight.t());
        for r in 0..r_count {
            let mut w = Array2::zeros(layer.bases[0].raw_dim());
            for (b, basis) in layer.bases.iter().enumerate() {
                w.scaled_add(layer.coeffs[(r, b)], basis);
            }
            z = z + adjacency[r].dot(&h).dot(&w.t());
        }
        if l < 2 {
            z.mapv_inplace(f64::tanh);
        }
        let _ = config;
        h = z.clone();
        out.push(z);
    }
    out
}

/// Random points in a box.
pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dims: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, dims), |_| rng.random_range(-scale..scale))
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
