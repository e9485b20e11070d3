//! Soft nearest neighbor training of the encoder.
//!
//! The loss over a batch N with labels Y and inverse temperature `rho`:
//!
//! `L = -(1/|N|) sum_i log( sum_{j!=i, Y_j=Y_i} exp(-|h_i-h_j|^2 rho)
//!                        / sum_{k!=i}          exp(-|h_i-h_k|^2 rho) )`
//!
//! Distances are squared Euclidean over the final-layer embeddings. Both
//! sums are stabilized by subtracting the per-node maximum exponent, which
//! cancels in the ratio. `rho = 1/T` is learned alongside the network
//! parameters and clamped to a small positive floor.
//!
//! Gradients are exact reverse-mode derivatives through the loss, the three
//! convolution layers, and the basis decomposition; nothing is estimated.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::alignment::{FoldSplit, GoldClustering};
use crate::error::{Error, Result};
use crate::gcn::{
    activation_derivatives, aggregate, aggregate_transpose, compose_weight, forward_with_tape,
    EncodedGraph, GcnConfig, GcnParams, Tape,
};
use crate::graph::KnowledgeGraph;

/// Gold clusters smaller than this never contribute batch nodes: every fold
/// part is then guaranteed at least two members per cluster.
pub const MIN_CLUSTER_SIZE_FOR_LOSS: usize = 10;

/// A loss batch: embedding rows plus their gold-cluster labels. Rows are
/// kept sorted so summation order is canonical regardless of caller order.
#[derive(Debug, Clone)]
pub struct SnnBatch {
    rows: Vec<usize>,
    labels: Vec<u32>,
}

impl SnnBatch {
    /// Validates that every node has at least one same-label peer.
    pub fn new(mut members: Vec<(usize, u32)>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        for &(row, label) in &members {
            let has_peer = members
                .iter()
                .any(|&(other, l)| other != row && l == label);
            if !has_peer {
                return Err(Error::LonelyBatchNode(format!("row {row}")));
            }
        }
        let (rows, labels) = members.into_iter().unzip();
        Ok(SnnBatch { rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
}

/// Learned inverse temperature with its positivity floor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TemperatureParam {
    pub rho: f64,
    pub floor: f64,
}

impl TemperatureParam {
    pub fn from_temperature(t: f64, floor: f64) -> Self {
        TemperatureParam { rho: 1.0 / t, floor }
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.rho
    }

    pub fn clamp(&mut self) {
        if self.rho < self.floor {
            self.rho = self.floor;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub min_delta: f64,
    pub initial_temperature: f64,
    pub rho_floor: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 200,
            learning_rate: 0.01,
            patience: 10,
            min_delta: 1e-4,
            initial_temperature: 1.0,
            rho_floor: 1e-6,
            seed: 0,
        }
    }
}

/// Exact gradients for every layer parameter and for rho.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<crate::gcn::LayerParams>,
    pub rho: f64,
}

impl Gradients {
    pub fn is_finite(&self) -> bool {
        self.rho.is_finite()
            && self
                .layers
                .iter()
                .all(|l| l.iter_values().all(f64::is_finite))
    }
}

fn squared_distance(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

struct NodeTerm {
    term: f64,
    /// Stabilized weights exp(-D*rho - M) toward every other batch member.
    weights: Vec<f64>,
    num: f64,
    den: f64,
    num_weighted_dist: f64,
    den_weighted_dist: f64,
}

#[allow(clippy::needless_range_loop)] // p/q walk three parallel arrays
fn node_terms(h: &Array2<f64>, batch: &SnnBatch, rho: f64) -> Result<Vec<NodeTerm>> {
    if rho <= 0.0 {
        return Err(Error::Parameter("rho must be positive".into()));
    }
    let m = batch.len();
    if m < 2 {
        return Err(Error::Parameter(
            "batch needs at least two nodes".into(),
        ));
    }
    let mut out = Vec::with_capacity(m);
    let mut dist = vec![0.0; m];
    for p in 0..m {
        let hp = h.row(batch.rows[p]);
        let mut min_dist = f64::INFINITY;
        for q in 0..m {
            if q == p {
                continue;
            }
            let d = squared_distance(hp, h.row(batch.rows[q]));
            dist[q] = d;
            if d < min_dist {
                min_dist = d;
            }
        }
        let max_exponent = -min_dist * rho;
        let mut weights = vec![0.0; m];
        let (mut num, mut den) = (0.0, 0.0);
        let (mut num_wd, mut den_wd) = (0.0, 0.0);
        for q in 0..m {
            if q == p {
                continue;
            }
            let w = (-dist[q] * rho - max_exponent).exp();
            weights[q] = w;
            den += w;
            den_wd += dist[q] * w;
            if batch.labels[q] == batch.labels[p] {
                num += w;
                num_wd += dist[q] * w;
            }
        }
        out.push(NodeTerm {
            term: den.ln() - num.ln(),
            weights,
            num,
            den,
            num_weighted_dist: num_wd,
            den_weighted_dist: den_wd,
        });
    }
    Ok(out)
}

/// The soft nearest neighbor loss over the given batch.
pub fn snn_loss(h: &Array2<f64>, batch: &SnnBatch, rho: f64) -> Result<f64> {
    let terms = node_terms(h, batch, rho)?;
    Ok(terms.iter().map(|t| t.term).sum::<f64>() / batch.len() as f64)
}

/// Loss plus its gradient with respect to the embeddings (a full-height
/// matrix, nonzero only on batch rows) and to rho.
pub fn snn_loss_grad(
    h: &Array2<f64>,
    batch: &SnnBatch,
    rho: f64,
) -> Result<(f64, Array2<f64>, f64)> {
    let terms = node_terms(h, batch, rho)?;
    let m = batch.len();
    let inv_m = 1.0 / m as f64;
    let loss = terms.iter().map(|t| t.term).sum::<f64>() * inv_m;

    let mut dh = Array2::zeros(h.raw_dim());
    let mut drho = 0.0;
    for (p, t) in terms.iter().enumerate() {
        drho += (t.num_weighted_dist / t.num - t.den_weighted_dist / t.den) * inv_m;
        for q in 0..m {
            if q == p {
                continue;
            }
            let same = batch.labels[q] == batch.labels[p];
            let coeff =
                rho * inv_m * (if same { t.weights[q] / t.num } else { 0.0 } - t.weights[q] / t.den);
            if coeff == 0.0 {
                continue;
            }
            let (rp, rq) = (batch.rows[p], batch.rows[q]);
            for c in 0..h.ncols() {
                let diff = 2.0 * coeff * (h[(rp, c)] - h[(rq, c)]);
                dh[(rp, c)] += diff;
                dh[(rq, c)] -= diff;
            }
        }
    }
    Ok((loss, dh, drho))
}

/// Exact reverse-mode gradients of the batch loss through all three layers.
/// Returns the loss value alongside.
pub fn backward(
    graph: &EncodedGraph,
    params: &GcnParams,
    config: &GcnConfig,
    tape: &Tape,
    batch: &SnnBatch,
    rho: f64,
) -> Result<(f64, Gradients)> {
    let num_preds = graph.predicate_count();
    let (loss, mut dh, drho) = snn_loss_grad(tape.output(), batch, rho)?;
    let mut grads: Vec<crate::gcn::LayerParams> = params
        .layers
        .iter()
        .map(crate::gcn::LayerParams::zeros_like)
        .collect();

    for l in (0..3).rev() {
        let layer = &params.layers[l];
        let out = tape.layer(l);
        let mut dz = dh;
        dz.zip_mut_with(
            &activation_derivatives(config.activations[l], out),
            |g, &d| *g *= d,
        );

        if l > 0 {
            let h_in = tape.layer(l - 1);
            grads[l].self_weight = dz.t().dot(h_in);
            let mut dh_in = dz.dot(&layer.self_weight);
            for r in 0..num_preds {
                let m_r = aggregate(graph, r, &h_in.view());
                let dw_r = dz.t().dot(&m_r);
                project_onto_bases(&mut grads[l], layer, r, &dw_r);
                let w_r = compose_weight(layer, r)?;
                let q_r = dz.dot(&w_r);
                dh_in += &aggregate_transpose(graph, r, &q_r.view());
            }
            dh = dh_in;
        } else {
            // featureless input: H_in is the implicit identity
            grads[0].self_weight = transposed(&dz);
            for r in 0..num_preds {
                let dw_r = transposed(&aggregate_transpose(graph, r, &dz.view()));
                project_onto_bases(&mut grads[0], layer, r, &dw_r);
            }
            dh = Array2::zeros((0, 0));
        }
    }

    Ok((
        loss,
        Gradients {
            layers: grads,
            rho: drho,
        },
    ))
}

/// Standard-layout copy of a matrix transpose; the optimizer walks
/// parameter and gradient arrays as flat slices.
fn transposed(m: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((m.ncols(), m.nrows()));
    out.assign(&m.t());
    out
}

/// Splits a composed-weight gradient into coefficient and basis gradients:
/// `d a[r][b] = <dW_r, V_b>` and `d V_b += a[r][b] * dW_r`.
fn project_onto_bases(
    grads: &mut crate::gcn::LayerParams,
    layer: &crate::gcn::LayerParams,
    r: usize,
    dw_r: &Array2<f64>,
) {
    for (b, basis) in layer.bases.iter().enumerate() {
        let inner: f64 = dw_r
            .iter()
            .zip(basis.iter())
            .map(|(x, y)| x * y)
            .sum();
        grads.coeffs[(r, b)] += inner;
        grads.bases[b].scaled_add(layer.coeffs[(r, b)], dw_r);
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-8;

/// First/second moment accumulators mirroring the parameter shapes.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: GcnParams,
    v: GcnParams,
    m_rho: f64,
    v_rho: f64,
    step: u64,
}

impl AdamState {
    pub fn new(params: &GcnParams) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            m_rho: 0.0,
            v_rho: 0.0,
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

fn adam_update_slice(
    xs: &mut [f64],
    ms: &mut [f64],
    vs: &mut [f64],
    gs: &[f64],
    lr: f64,
    correction1: f64,
    correction2: f64,
) {
    for (((x, m), v), &g) in xs.iter_mut().zip(ms).zip(vs).zip(gs) {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = *m / correction1;
        let v_hat = *v / correction2;
        *x -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
    }
}

/// One Adam update over every parameter and rho; rho is clamped to its floor
/// afterwards. Non-finite gradients abort with diagnostics.
pub fn adam_step(
    params: &mut GcnParams,
    temperature: &mut TemperatureParam,
    state: &mut AdamState,
    grads: &Gradients,
    config: &TrainConfig,
) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::NonFinite(format!(
            "gradients at optimizer step {}",
            state.step + 1
        )));
    }
    state.step += 1;
    let correction1 = 1.0 - ADAM_BETA1.powi(state.step as i32);
    let correction2 = 1.0 - ADAM_BETA2.powi(state.step as i32);
    let lr = config.learning_rate;
    for (l, grad_layer) in grads.layers.iter().enumerate() {
        let pl = &mut params.layers[l];
        let ml = &mut state.m.layers[l];
        let vl = &mut state.v.layers[l];
        for b in 0..pl.bases.len() {
            adam_update_slice(
                pl.bases[b].as_slice_mut().expect("standard layout"),
                ml.bases[b].as_slice_mut().expect("standard layout"),
                vl.bases[b].as_slice_mut().expect("standard layout"),
                grad_layer.bases[b].as_slice().expect("standard layout"),
                lr,
                correction1,
                correction2,
            );
        }
        adam_update_slice(
            pl.coeffs.as_slice_mut().expect("standard layout"),
            ml.coeffs.as_slice_mut().expect("standard layout"),
            vl.coeffs.as_slice_mut().expect("standard layout"),
            grad_layer.coeffs.as_slice().expect("standard layout"),
            lr,
            correction1,
            correction2,
        );
        adam_update_slice(
            pl.self_weight.as_slice_mut().expect("standard layout"),
            ml.self_weight.as_slice_mut().expect("standard layout"),
            vl.self_weight.as_slice_mut().expect("standard layout"),
            grad_layer.self_weight.as_slice().expect("standard layout"),
            lr,
            correction1,
            correction2,
        );
    }
    let mut rho = [temperature.rho];
    adam_update_slice(
        &mut rho,
        std::slice::from_mut(&mut state.m_rho),
        std::slice::from_mut(&mut state.v_rho),
        &[grads.rho],
        lr,
        correction1,
        correction2,
    );
    temperature.rho = rho[0];
    temperature.clamp();
    Ok(())
}

/// One epoch's losses; temperature is reported as T = 1/rho.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub temperature: f64,
}

/// Everything a finished training run hands back: the parameters and rho at
/// the best recorded validation loss, final-layer embeddings recomputed from
/// them, and the loss history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: GcnParams,
    pub temperature: TemperatureParam,
    pub embeddings: Array2<f64>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

fn batch_for(
    graph: &KnowledgeGraph,
    gold: &GoldClustering,
    members: &std::collections::BTreeSet<String>,
    which: &str,
) -> Result<SnnBatch> {
    let mut pairs = Vec::new();
    for iri in members {
        if gold.cluster_size_of(iri).unwrap_or(0) < MIN_CLUSTER_SIZE_FOR_LOSS {
            continue;
        }
        let Some(node) = graph.node_id(iri) else {
            return Err(Error::Config(format!(
                "{which} node `{iri}` is missing from the graph"
            )));
        };
        let label = gold
            .label_of(iri)
            .ok_or_else(|| Error::Config(format!("{which} node `{iri}` has no gold label")))?;
        pairs.push((node.idx(), label));
    }
    if pairs.is_empty() {
        return Err(Error::Config(format!(
            "no {which} nodes remain after the cluster-size filter"
        )));
    }
    SnnBatch::new(pairs)
}

/// Full-batch training on one fold: per epoch a forward pass, train loss and
/// exact gradients over the train-fold nodes (clusters of at least 10), a
/// validation loss over the validation fold, early stopping, then one Adam
/// step. Returns the parameters from the best-validation epoch.
pub fn train(
    graph: &KnowledgeGraph,
    gold: &GoldClustering,
    fold: &FoldSplit,
    gcn_config: &GcnConfig,
    train_config: &TrainConfig,
) -> Result<TrainOutcome> {
    let encoded = EncodedGraph::from_graph(graph);
    let train_batch = batch_for(graph, gold, &fold.train, "train")?;
    let val_batch = batch_for(graph, gold, &fold.val, "validation")?;

    let mut params = crate::gcn::init_params(gcn_config, &encoded, train_config.seed)?;
    let mut temperature = TemperatureParam::from_temperature(
        train_config.initial_temperature,
        train_config.rho_floor,
    );
    let mut adam = AdamState::new(&params);

    let mut best: Option<(f64, GcnParams, TemperatureParam, usize)> = None;
    let mut waited = 0usize;
    let mut stopped_early = false;
    let mut history = Vec::new();

    for epoch in 0..train_config.max_epochs {
        let tape = forward_with_tape(&encoded, &params, gcn_config)?;
        let (train_loss, grads) =
            backward(&encoded, &params, gcn_config, &tape, &train_batch, temperature.rho)?;
        let val_loss = snn_loss(tape.output(), &val_batch, temperature.rho)?;
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            temperature: temperature.temperature(),
        });

        let best_so_far = best.as_ref().map(|(v, _, _, _)| *v).unwrap_or(f64::INFINITY);
        if val_loss < best_so_far - train_config.min_delta {
            waited = 0;
        } else {
            waited += 1;
        }
        if val_loss < best_so_far {
            best = Some((val_loss, params.clone(), temperature, epoch));
        }
        if waited >= train_config.patience {
            stopped_early = true;
            break;
        }
        adam_step(&mut params, &mut temperature, &mut adam, &grads, train_config)?;
    }

    let (best_params, best_temperature, best_epoch) = match best {
        Some((_, p, t, e)) => (p, t, Some(e)),
        None => (params, temperature, None),
    };
    let tape = forward_with_tape(&encoded, &best_params, gcn_config)?;
    Ok(TrainOutcome {
        embeddings: tape.output().clone(),
        params: best_params,
        temperature: best_temperature,
        history,
        best_epoch,
        stopped_early,
    })
}
