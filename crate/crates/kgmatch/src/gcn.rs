//! Relational graph convolutional encoder with basis-decomposed weights.
//!
//! Three layers map a featureless (implicit one-hot) input to 16-dimensional
//! node embeddings. Per predicate r, layer l applies a weight matrix
//! `W_r = sum_b a[r][b] * V_b` shared through B basis matrices, plus a full
//! self-connection weight `W0`. Messages from the neighbors of node i under
//! r are averaged (normalization constant `c = |N_i^r|`) and summed over
//! predicates:
//!
//! `h_i(l+1) = act( sum_r sum_{j in N_i^r} W_r h_j(l) / c_{i,r} + W0 h_i(l) )`
//!
//! One-hot input vectors are never materialized: at layer 0 the message from
//! neighbor j is column j of `W_r`, looked up by node index.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::KnowledgeGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        if self == Activation::Tanh {
            z.mapv_inplace(f64::tanh);
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(self, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Linear => 1.0,
        }
    }
}

/// Neighbor-message normalization rule for `c_{i,r}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `c_{i,r} = |N_i^r|`, recomputed on the graph being encoded.
    #[default]
    NeighborCount,
}

/// Encoder settings. No regularization (dropout or weight decay) is
/// applied; either would be a config extension here.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GcnConfig {
    /// Output dimensions of the three layers.
    pub hidden_dims: [usize; 3],
    /// Number of shared basis matrices per layer.
    pub num_bases: usize,
    pub activations: [Activation; 3],
    pub normalization: Normalization,
}

impl Default for GcnConfig {
    fn default() -> Self {
        GcnConfig {
            hidden_dims: [16, 16, 16],
            num_bases: 10,
            activations: [Activation::Tanh, Activation::Tanh, Activation::Linear],
            normalization: Normalization::NeighborCount,
        }
    }
}

impl GcnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_bases == 0 {
            return Err(Error::Parameter("num_bases must be at least 1".into()));
        }
        if self.hidden_dims.contains(&0) {
            return Err(Error::Parameter("layer dimensions must be positive".into()));
        }
        Ok(())
    }

    /// Per-layer (input, output) dimensions for a graph of `n` nodes.
    pub fn layer_dims(&self, n: usize) -> [(usize, usize); 3] {
        [
            (n, self.hidden_dims[0]),
            (self.hidden_dims[0], self.hidden_dims[1]),
            (self.hidden_dims[1], self.hidden_dims[2]),
        ]
    }
}

/// Compact per-predicate forward adjacency (CSR), rows in node-id order.
#[derive(Debug, Clone)]
pub struct EncodedGraph {
    node_count: usize,
    preds: Vec<Csr>,
}

#[derive(Debug, Clone)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl EncodedGraph {
    pub fn from_graph(g: &KnowledgeGraph) -> Self {
        let n = g.node_count();
        let r = g.predicate_count();
        let mut buckets: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); n]; r];
        // triples iterate sorted by (subject, predicate, object), so each
        // bucket collects ascending targets
        for t in g.triples() {
            buckets[t.predicate.idx()][t.subject.idx()].push(t.object.0);
        }
        let preds = buckets
            .into_iter()
            .map(|rows| {
                let mut offsets = Vec::with_capacity(n + 1);
                let mut targets = Vec::new();
                offsets.push(0);
                for row in rows {
                    targets.extend_from_slice(&row);
                    offsets.push(targets.len());
                }
                Csr { offsets, targets }
            })
            .collect();
        EncodedGraph {
            node_count: n,
            preds,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn predicate_count(&self) -> usize {
        self.preds.len()
    }

    fn neighbors(&self, r: usize, i: usize) -> &[u32] {
        let csr = &self.preds[r];
        &csr.targets[csr.offsets[i]..csr.offsets[i + 1]]
    }
}

/// Parameters of one layer. `bases` and `self_weight` have shape
/// (d_out, d_in); `coeffs` has shape (num_predicates, num_bases).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerParams {
    pub bases: Vec<Array2<f64>>,
    pub coeffs: Array2<f64>,
    pub self_weight: Array2<f64>,
}

impl LayerParams {
    pub fn zeros_like(&self) -> Self {
        LayerParams {
            bases: self
                .bases
                .iter()
                .map(|b| Array2::zeros(b.raw_dim()))
                .collect(),
            coeffs: Array2::zeros(self.coeffs.raw_dim()),
            self_weight: Array2::zeros(self.self_weight.raw_dim()),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.bases.iter().map(Array2::len).sum::<usize>() + self.coeffs.len() + self.self_weight.len()
    }

    /// Applies `f` to every parameter entry, pairing with `other` entrywise.
    pub fn zip_apply(&mut self, other: &LayerParams, mut f: impl FnMut(&mut f64, f64)) {
        for (b, ob) in self.bases.iter_mut().zip(&other.bases) {
            b.zip_mut_with(ob, |x, &y| f(x, y));
        }
        self.coeffs.zip_mut_with(&other.coeffs, |x, &y| f(x, y));
        self.self_weight
            .zip_mut_with(&other.self_weight, |x, &y| f(x, y));
    }

    pub fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.bases
            .iter()
            .flat_map(|b| b.iter().copied())
            .chain(self.coeffs.iter().copied())
            .chain(self.self_weight.iter().copied())
    }
}

/// Full parameter set of the three-layer encoder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GcnParams {
    pub layers: Vec<LayerParams>,
}

impl GcnParams {
    pub fn zeros_like(&self) -> Self {
        GcnParams {
            layers: self.layers.iter().map(LayerParams::zeros_like).collect(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(LayerParams::parameter_count).sum()
    }
}

/// Draws parameters from symmetric uniform ranges scaled by layer fan-in and
/// fan-out; deterministic under the seed.
pub fn init_params(
    config: &GcnConfig,
    graph: &EncodedGraph,
    seed: u64,
) -> Result<GcnParams> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_preds = graph.predicate_count();
    let mut layers = Vec::with_capacity(3);
    for (d_in, d_out) in config.layer_dims(graph.node_count()) {
        let matrix_limit = (6.0 / (d_in + d_out) as f64).sqrt();
        let coeff_limit = (3.0 / config.num_bases as f64).sqrt();
        let bases = (0..config.num_bases)
            .map(|_| uniform_matrix(&mut rng, d_out, d_in, matrix_limit))
            .collect();
        let coeffs = uniform_matrix(&mut rng, num_preds, config.num_bases, coeff_limit);
        let self_weight = uniform_matrix(&mut rng, d_out, d_in, matrix_limit);
        layers.push(LayerParams {
            bases,
            coeffs,
            self_weight,
        });
    }
    Ok(GcnParams { layers })
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, limit: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
}

/// The composed per-predicate weight `W_r = sum_b a[r][b] * V_b`.
pub fn compose_weight(layer: &LayerParams, r: usize) -> Result<Array2<f64>> {
    if r >= layer.coeffs.nrows() {
        return Err(Error::UnknownId {
            kind: "predicate",
            id: r as u32,
        });
    }
    let mut w = Array2::zeros(layer.bases[0].raw_dim());
    for (b, basis) in layer.bases.iter().enumerate() {
        w.scaled_add(layer.coeffs[(r, b)], basis);
    }
    Ok(w)
}

/// Neighbor-mean aggregation `M_r` with `M_r[i] = mean_{j in N_i^r} h[j]`.
pub(crate) fn aggregate(graph: &EncodedGraph, r: usize, h: &ArrayView2<f64>) -> Array2<f64> {
    let n = graph.node_count();
    let d = h.ncols();
    let mut m = Array2::zeros((n, d));
    for i in 0..n {
        let neighbors = graph.neighbors(r, i);
        if neighbors.is_empty() {
            continue;
        }
        let inv_c = 1.0 / neighbors.len() as f64;
        let mut row = m.row_mut(i);
        for &j in neighbors {
            row.scaled_add(inv_c, &h.row(j as usize));
        }
    }
    m
}

/// Transpose aggregation: `out[j] = sum_{i : j in N_i^r} q[i] / c_{i,r}`.
pub(crate) fn aggregate_transpose(
    graph: &EncodedGraph,
    r: usize,
    q: &ArrayView2<f64>,
) -> Array2<f64> {
    let n = graph.node_count();
    let d = q.ncols();
    let mut out = Array2::zeros((n, d));
    for i in 0..n {
        let neighbors = graph.neighbors(r, i);
        if neighbors.is_empty() {
            continue;
        }
        let inv_c = 1.0 / neighbors.len() as f64;
        let source = q.row(i);
        for &j in neighbors {
            out.row_mut(j as usize).scaled_add(inv_c, &source);
        }
    }
    out
}

/// Records per-layer activations; enough, together with the graph and
/// parameters, to run the exact backward pass. Memory is proportional to
/// the summed activation sizes.
#[derive(Debug, Clone)]
pub struct Tape {
    pub(crate) activations: Vec<Array2<f64>>,
}

impl Tape {
    /// Final-layer embeddings.
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("tape holds three layers")
    }

    pub fn layer(&self, l: usize) -> &Array2<f64> {
        &self.activations[l]
    }

    pub fn element_count(&self) -> usize {
        self.activations.iter().map(Array2::len).sum()
    }
}

fn check_shapes(graph: &EncodedGraph, params: &GcnParams, config: &GcnConfig) -> Result<()> {
    if params.layers.len() != 3 {
        return Err(Error::Shape(format!(
            "expected 3 layers, found {}",
            params.layers.len()
        )));
    }
    for (l, ((d_in, d_out), layer)) in config
        .layer_dims(graph.node_count())
        .into_iter()
        .zip(&params.layers)
        .enumerate()
    {
        if layer.bases.len() != config.num_bases {
            return Err(Error::Shape(format!(
                "layer {l}: expected {} bases, found {}",
                config.num_bases,
                layer.bases.len()
            )));
        }
        for basis in &layer.bases {
            if basis.dim() != (d_out, d_in) {
                return Err(Error::Shape(format!(
                    "layer {l}: basis shape {:?}, expected ({d_out}, {d_in})",
                    basis.dim()
                )));
            }
        }
        if layer.self_weight.dim() != (d_out, d_in) {
            return Err(Error::Shape(format!(
                "layer {l}: self-weight shape {:?}, expected ({d_out}, {d_in})",
                layer.self_weight.dim()
            )));
        }
        if layer.coeffs.dim() != (graph.predicate_count(), config.num_bases) {
            return Err(Error::Shape(format!(
                "layer {l}: coefficient shape {:?}, expected ({}, {})",
                layer.coeffs.dim(),
                graph.predicate_count(),
                config.num_bases
            )));
        }
    }
    Ok(())
}

/// Runs the encoder, recording the tape for the backward pass.
pub fn forward_with_tape(
    graph: &EncodedGraph,
    params: &GcnParams,
    config: &GcnConfig,
) -> Result<Tape> {
    check_shapes(graph, params, config)?;
    let n = graph.node_count();
    let num_preds = graph.predicate_count();
    let mut activations = Vec::with_capacity(3);

    // Layer 0: one-hot input handled by column lookup. The message from
    // neighbor j under r is column j of W_r; the self term is column i of W0.
    let layer = &params.layers[0];
    let d1 = config.hidden_dims[0];
    let mut z = Array2::zeros((n, d1));
    for r in 0..num_preds {
        let w_r = compose_weight(layer, r)?; // (d1, n)
        for i in 0..n {
            let neighbors = graph.neighbors(r, i);
            if neighbors.is_empty() {
                continue;
            }
            let inv_c = 1.0 / neighbors.len() as f64;
            let mut row = z.row_mut(i);
            for &j in neighbors {
                row.scaled_add(inv_c, &w_r.column(j as usize));
            }
        }
    }
    z += &layer.self_weight.t();
    config.activations[0].apply(&mut z);
    activations.push(z);

    // Layers 1 and 2: sparse aggregation then dense products.
    for l in 1..3 {
        let layer = &params.layers[l];
        let h_in = activations[l - 1].view();
        let mut z = h_in.dot(&layer.self_weight.t());
        for r in 0..num_preds {
            let m_r = aggregate(graph, r, &h_in);
            let w_r = compose_weight(layer, r)?;
            z += &m_r.dot(&w_r.t());
        }
        config.activations[l].apply(&mut z);
        activations.push(z);
    }
    Ok(Tape { activations })
}

/// Per-layer embedding matrices (the tape without its bookkeeping role).
pub fn forward(
    graph: &EncodedGraph,
    params: &GcnParams,
    config: &GcnConfig,
) -> Result<Vec<Array2<f64>>> {
    Ok(forward_with_tape(graph, params, config)?.activations)
}

pub(crate) fn activation_derivatives(
    activation: Activation,
    output: &Array2<f64>,
) -> Array2<f64> {
    output.mapv(|v| activation.derivative_from_output(v))
}
