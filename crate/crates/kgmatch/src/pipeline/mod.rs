//! End-to-end run orchestration behind the `kgmatch` binary.
//!
//! A run directory is laid out as:
//!
//! ```text
//! out/
//!   manifest.json                  resolved config, versions, timings, cell states
//!   input/graph.nt                 generated input (synthetic runs)
//!   input/ledger.json
//!   gold/links.json                stripped alignment links
//!   gold/c0.json ...               gold clustering + fold splits
//!   variants/g0/graph.nt           saturated, 3-hop-reduced variant
//!   variants/g0/report.json
//!   variants/g0/representatives.json
//!   cells/c0_g0_f1/                one (clustering, variant, fold) cell
//!     history.csv  checkpoint.json  embeddings.csv  distances.csv
//!     assignment_<alg>_t<thr>.csv  metrics_<alg>_t<thr>.json
//!   report/report.csv  report/report.json
//! ```
//!
//! Cells are independent and scheduled onto a bounded worker pool. Every
//! stage directory is stamped with output checksums; valid stages are
//! reused on rerun, so interrupted runs resume and deleted intermediates
//! are reproduced bit-identically. Timings live only in the manifest.

pub mod config;
pub mod io;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use config::{derive_seed, load_config, InputConfig, RunConfig, SelectConfig};
pub use report::{cmd_report, ReportRow};

use crate::alignment::{
    alignment_predicates, compute_gold_clustering, filter_min_size, split_folds, AlignmentLink,
    ClusteringId, FoldSplit, GoldClustering,
};
use crate::clustering::{optics_cluster, single_cluster, ward_cluster, Algorithm};
use crate::error::{Error, Result};
use crate::evaluation::{
    accuracy, adjusted_rand_index, distance_analysis, normalized_mutual_information, FoldMetrics,
};
use crate::gcn::{GcnConfig, GcnParams};
use crate::graph::{parse_ntriples, to_ntriples_string, KnowledgeGraph, NodeId, WellKnownIris};
use crate::saturation::{build_variant, reduce_to_khop, SaturationReport, VariantTag};
use crate::synth::{generate, SynthConfig};
use crate::training::{train, TrainOutcome};

#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    pub jobs: usize,
    pub dry_run: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            jobs: 1,
            dry_run: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase", tag = "state", content = "detail")]
pub enum CellState {
    Computed,
    Reused,
    Failed(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: RunConfig,
    pub input_checksum: String,
    pub dry_run: bool,
    pub planned_cells: Vec<String>,
    pub cells: BTreeMap<String, CellState>,
    /// Checksums of every stamped artifact, keyed by path under the run
    /// directory.
    pub artifact_checksums: BTreeMap<String, String>,
    /// Wall-clock per stage and cell; only recorded here, never in outputs.
    pub timings_ms: BTreeMap<String, u128>,
}

/// Serialized alongside each gold clustering: the fold splits belong to it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldFile {
    pub clustering: GoldClustering,
    pub folds: Vec<FoldSplit>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub gcn: GcnConfig,
    pub seed: u64,
    pub params: GcnParams,
    pub rho: f64,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

/// One cell's metric file: real values or the reason the combination was
/// skipped (for example an empty evaluation set at a high threshold).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellMetrics {
    Metrics(FoldMetrics),
    Skipped { skipped: String },
}

pub fn cell_name(ci: ClusteringId, gj: VariantTag, fold: usize) -> String {
    format!("{ci}_{gj}_f{fold}")
}

/// Generates the synthetic input and writes `input/graph.nt` plus
/// `input/ledger.json`. Also the `synthgen` subcommand.
pub fn cmd_synthgen(synth: &SynthConfig, out: &Path) -> Result<()> {
    let (graph, ledger) = generate(synth)?;
    let mut files = BTreeMap::new();
    files.insert(
        "graph.nt".to_string(),
        to_ntriples_string(&graph).into_bytes(),
    );
    files.insert(
        "ledger.json".to_string(),
        io::to_json_pretty(&ledger)?.into_bytes(),
    );
    io::write_stage(&out.join("input"), &files)
}

/// The input graph plus a checksum of its serialized form.
fn prepare_input(config: &RunConfig) -> Result<(KnowledgeGraph, String)> {
    match (&config.input.path, &config.input.synth) {
        (Some(path), None) => {
            let bytes = io::read_bytes(path)?;
            let checksum = io::sha256_hex(&bytes);
            let outcome = parse_ntriples(std::io::Cursor::new(&bytes))?;
            Ok((outcome.graph, checksum))
        }
        (None, Some(synth)) => {
            let input_dir = config.out.join("input");
            if !io::stage_is_valid(&input_dir) {
                cmd_synthgen(synth, &config.out)?;
            }
            let bytes = io::read_bytes(&input_dir.join("graph.nt"))?;
            let checksum = io::sha256_hex(&bytes);
            let outcome = parse_ntriples(std::io::Cursor::new(&bytes))?;
            Ok((outcome.graph, checksum))
        }
        _ => Err(Error::Config("exactly one input source is required".into())),
    }
}

fn select_candidates(g: &KnowledgeGraph, select: &SelectConfig) -> Result<BTreeSet<String>> {
    let candidates: BTreeSet<String> = match (&select.prefix, &select.list) {
        (Some(prefix), None) => g
            .node_ids_iter()
            .filter_map(|id| {
                let iri = g.node_iri(id).ok()?;
                iri.starts_with(prefix.as_str()).then(|| iri.to_string())
            })
            .collect(),
        (None, Some(list)) => {
            for iri in list {
                if g.node_id(iri).is_none() {
                    return Err(Error::Config(format!(
                        "selected candidate `{iri}` is not in the graph"
                    )));
                }
            }
            list.iter().cloned().collect()
        }
        _ => return Err(Error::Config("exactly one selection rule is required".into())),
    };
    if candidates.is_empty() {
        return Err(Error::Config("candidate selection matched no nodes".into()));
    }
    Ok(candidates)
}

struct PreparedRun {
    stripped: KnowledgeGraph,
    candidates: BTreeSet<String>,
    links: Vec<AlignmentLink>,
}

fn prepare(config: &RunConfig) -> Result<PreparedRun> {
    let (graph, _) = prepare_input(config)?;
    let candidates = select_candidates(&graph, &config.selection())?;
    let candidate_ids: BTreeSet<NodeId> = candidates
        .iter()
        .map(|iri| g_node(&graph, iri))
        .collect::<Result<_>>()?;
    let predicates = alignment_predicates(&graph);
    let (stripped, links) = crate::alignment::strip_alignments(&graph, &candidate_ids, &predicates)?;
    Ok(PreparedRun {
        stripped,
        candidates,
        links,
    })
}

fn g_node(g: &KnowledgeGraph, iri: &str) -> Result<NodeId> {
    g.node_id(iri)
        .ok_or_else(|| Error::Config(format!("node `{iri}` is not in the graph")))
}

/// Computes gold clusterings and fold splits, writing one JSON per
/// clustering plus the stripped links. Reused when already valid.
pub fn cmd_gold(config: &RunConfig) -> Result<BTreeMap<ClusteringId, GoldFile>> {
    let gold_dir = config.out.join("gold");
    if !io::stage_is_valid(&gold_dir) {
        let prepared = prepare(config)?;
        let mut files = BTreeMap::new();
        files.insert(
            "links.json".to_string(),
            io::to_json_pretty(&prepared.links)?.into_bytes(),
        );
        for &ci in &config.clusterings {
            let clustering = compute_gold_clustering(&prepared.links, ci, &prepared.candidates);
            let seed = derive_seed(config.seed, &["folds", &ci.to_string()]);
            let folds = split_folds(&clustering, seed);
            let file = GoldFile {
                clustering,
                folds,
                seed,
            };
            files.insert(format!("{ci}.json"), io::to_json_pretty(&file)?.into_bytes());
        }
        io::write_stage(&gold_dir, &files)?;
    }
    let mut out = BTreeMap::new();
    for &ci in &config.clusterings {
        out.insert(ci, io::read_json(&gold_dir.join(format!("{ci}.json")))?);
    }
    Ok(out)
}

fn load_links(config: &RunConfig) -> Result<Vec<AlignmentLink>> {
    io::read_json(&config.out.join("gold").join("links.json"))
}

/// Builds every requested variant from the alignment-stripped graph,
/// reduces it to the k-hop neighborhood of the candidates, and writes the
/// graph, its saturation report, and the contraction representatives.
pub fn cmd_saturate(config: &RunConfig) -> Result<Vec<(VariantTag, SaturationReport)>> {
    let wk = WellKnownIris::default();
    let mut prepared: Option<PreparedRun> = None;
    let mut reports = Vec::new();
    for &tag in &config.variants {
        let dir = variant_dir(&config.out, tag);
        if io::stage_is_valid(&dir) {
            reports.push((tag, io::read_json(&dir.join("report.json"))?));
            continue;
        }
        if prepared.is_none() {
            prepared = Some(prepare(config)?);
        }
        let run = prepared.as_ref().expect("just prepared");
        let (variant, report, cmap) = build_variant(&run.stripped, tag, &wk)?;
        let representatives = cmap.merged_iris(&run.stripped, &variant)?;
        let seeds: BTreeSet<NodeId> = run
            .candidates
            .iter()
            .map(|iri| {
                let rep = representatives.get(iri).map(String::as_str).unwrap_or(iri);
                g_node(&variant, rep)
            })
            .collect::<Result<_>>()?;
        let reduced = reduce_to_khop(&variant, &seeds, config.khop)?;
        let mut files = BTreeMap::new();
        files.insert(
            "graph.nt".to_string(),
            to_ntriples_string(&reduced).into_bytes(),
        );
        files.insert(
            "report.json".to_string(),
            io::to_json_pretty(&report)?.into_bytes(),
        );
        files.insert(
            "representatives.json".to_string(),
            io::to_json_pretty(&representatives)?.into_bytes(),
        );
        io::write_stage(&dir, &files)?;
        reports.push((tag, report));
    }
    Ok(reports)
}

fn variant_dir(out: &Path, tag: VariantTag) -> PathBuf {
    out.join("variants").join(tag.to_string())
}

fn cell_dir(out: &Path, name: &str) -> PathBuf {
    out.join("cells").join(name)
}

/// Everything one cell needs, shared read-only across the worker pool.
struct CellContext {
    config: RunConfig,
    links: Vec<AlignmentLink>,
    golds: BTreeMap<ClusteringId, GoldFile>,
    variants: BTreeMap<VariantTag, (Arc<KnowledgeGraph>, BTreeMap<String, String>)>,
}

fn load_cell_context(config: &RunConfig, golds: BTreeMap<ClusteringId, GoldFile>) -> Result<CellContext> {
    let links = load_links(config)?;
    let mut variants = BTreeMap::new();
    for &tag in &config.variants {
        let dir = variant_dir(&config.out, tag);
        let bytes = io::read_bytes(&dir.join("graph.nt"))?;
        let graph = parse_ntriples(std::io::Cursor::new(&bytes))?.graph;
        let representatives: BTreeMap<String, String> =
            io::read_json(&dir.join("representatives.json"))?;
        variants.insert(tag, (Arc::new(graph), representatives));
    }
    Ok(CellContext {
        config: config.clone(),
        links,
        golds,
        variants,
    })
}

fn translate_set(
    set: &BTreeSet<String>,
    representatives: &BTreeMap<String, String>,
) -> BTreeSet<String> {
    set.iter()
        .map(|iri| representatives.get(iri).cloned().unwrap_or_else(|| iri.clone()))
        .collect()
}

/// Gold labels and folds with candidate IRIs mapped through the sameAs
/// representatives of a contracted variant.
fn translate_gold(
    gold: &GoldFile,
    representatives: &BTreeMap<String, String>,
) -> (GoldClustering, Vec<FoldSplit>) {
    if representatives.is_empty() {
        return (gold.clustering.clone(), gold.folds.clone());
    }
    let mut labels = BTreeMap::new();
    for (iri, &label) in &gold.clustering.labels {
        let rep = representatives.get(iri).cloned().unwrap_or_else(|| iri.clone());
        labels.insert(rep, label);
    }
    let clustering = GoldClustering {
        id: gold.clustering.id,
        relations: gold.clustering.relations.clone(),
        labels,
        cluster_sizes: gold.clustering.cluster_sizes.clone(),
    };
    let folds = gold
        .folds
        .iter()
        .map(|f| FoldSplit {
            fold: f.fold,
            train: translate_set(&f.train, representatives),
            val: translate_set(&f.val, representatives),
            test: translate_set(&f.test, representatives),
        })
        .collect();
    (clustering, folds)
}

fn embeddings_csv(graph: &KnowledgeGraph, embeddings: &Array2<f64>) -> Result<String> {
    let dims = embeddings.ncols();
    let mut lines = Vec::with_capacity(graph.node_count() + 1);
    let header: Vec<String> = std::iter::once("iri".to_string())
        .chain((0..dims).map(|d| format!("dim{d}")))
        .collect();
    lines.push(io::csv_line(&header));
    for id in graph.node_ids_iter() {
        let mut fields = vec![graph.node_iri(id)?.to_string()];
        for d in 0..dims {
            fields.push(format!("{}", embeddings[(id.idx(), d)]));
        }
        lines.push(io::csv_line(&fields));
    }
    Ok(lines.join("\n") + "\n")
}

fn history_csv(outcome: &TrainOutcome) -> String {
    let mut lines = vec!["epoch,train_loss,val_loss,temperature".to_string()];
    for record in &outcome.history {
        lines.push(format!(
            "{},{},{},{}",
            record.epoch, record.train_loss, record.val_loss, record.temperature
        ));
    }
    lines.join("\n") + "\n"
}

fn distances_csv(
    distributions: &[crate::evaluation::DistanceDistribution],
) -> String {
    // the header pins the metric: plain (not squared) Euclidean
    let mut lines = vec!["relation,source,target,euclidean_distance".to_string()];
    for dist in distributions {
        for (source, target, d) in &dist.pairs {
            lines.push(format!("{},{source},{target},{d}", dist.relation.label()));
        }
    }
    lines.join("\n") + "\n"
}

fn assignment_csv(iris: &[String], labels: &[u32]) -> String {
    let mut lines = vec!["iri,label".to_string()];
    for (iri, label) in iris.iter().zip(labels) {
        lines.push(format!("{iri},{label}"));
    }
    lines.join("\n") + "\n"
}

/// Trains and evaluates one (clustering, variant, fold) cell, writing all
/// of its outputs. Skipped when its stamp is already valid.
fn run_cell(ctx: &CellContext, ci: ClusteringId, gj: VariantTag, fold_no: usize) -> Result<CellState> {
    let name = cell_name(ci, gj, fold_no);
    let dir = cell_dir(&ctx.config.out, &name);
    if io::stage_is_valid(&dir) {
        return Ok(CellState::Reused);
    }
    let (graph, representatives) = &ctx.variants[&gj];
    let gold_file = &ctx.golds[&ci];
    let (gold, folds) = translate_gold(gold_file, representatives);
    let fold = &folds[fold_no - 1];

    let mut train_config = ctx.config.train.clone();
    train_config.seed = derive_seed(ctx.config.seed, &["train", &name]);
    let outcome = train(graph, &gold, fold, &ctx.config.gcn, &train_config)?;

    let mut files = BTreeMap::new();
    files.insert("history.csv".to_string(), history_csv(&outcome).into_bytes());
    files.insert(
        "embeddings.csv".to_string(),
        embeddings_csv(graph, &outcome.embeddings)?.into_bytes(),
    );
    let checkpoint = Checkpoint {
        gcn: ctx.config.gcn.clone(),
        seed: train_config.seed,
        params: outcome.params.clone(),
        rho: outcome.temperature.rho,
        best_epoch: outcome.best_epoch,
        stopped_early: outcome.stopped_early,
    };
    files.insert(
        "checkpoint.json".to_string(),
        io::to_json_pretty(&checkpoint)?.into_bytes(),
    );

    // candidate rows in the variant graph, keyed by original IRI
    let mut row_of: BTreeMap<String, usize> = BTreeMap::new();
    for iri in gold_file.clustering.labels.keys() {
        let rep = representatives.get(iri).map(String::as_str).unwrap_or(iri);
        row_of.insert(iri.clone(), g_node(graph, rep)?.idx());
    }
    let original_fold = &gold_file.folds[fold_no - 1];
    let distributions = distance_analysis(
        &outcome.embeddings.view(),
        &row_of,
        &ctx.links,
        &original_fold.test,
    )?;
    files.insert(
        "distances.csv".to_string(),
        distances_csv(&distributions).into_bytes(),
    );

    for &threshold in &ctx.config.thresholds {
        let eligible = filter_min_size(&gold_file.clustering, threshold);
        let eval: Vec<String> = original_fold
            .test
            .iter()
            .filter(|iri| eligible.contains(*iri))
            .cloned()
            .collect();
        for &alg in &ctx.config.algorithms {
            let metrics_name = format!("metrics_{alg}_t{threshold}.json");
            let assignment_name = format!("assignment_{alg}_t{threshold}.csv");
            if eval.len() < 2 {
                let skipped = CellMetrics::Skipped {
                    skipped: format!(
                        "{} evaluation nodes at threshold {threshold}",
                        eval.len()
                    ),
                };
                files.insert(metrics_name, io::to_json_pretty(&skipped)?.into_bytes());
                continue;
            }
            let dims = outcome.embeddings.ncols();
            let mut points = Array2::zeros((eval.len(), dims));
            for (row, iri) in eval.iter().enumerate() {
                let src = row_of[iri];
                for d in 0..dims {
                    points[(row, d)] = outcome.embeddings[(src, d)];
                }
            }
            let gold_labels: Vec<u32> = eval
                .iter()
                .map(|iri| gold_file.clustering.labels[iri])
                .collect();
            let assignment = match alg {
                Algorithm::Ward | Algorithm::Single => {
                    let k = gold_labels.iter().collect::<BTreeSet<_>>().len();
                    if alg == Algorithm::Ward {
                        ward_cluster(&points.view(), k)?
                    } else {
                        single_cluster(&points.view(), k)?
                    }
                }
                Algorithm::Optics => {
                    let min_size = ctx.config.optics_min_size.unwrap_or(threshold);
                    optics_cluster(&points.view(), min_size, ctx.config.optics_xi)?
                }
            };
            let metrics = CellMetrics::Metrics(FoldMetrics {
                acc: accuracy(&assignment.labels, &gold_labels)?,
                ari: adjusted_rand_index(&assignment.labels, &gold_labels)?,
                nmi: normalized_mutual_information(&assignment.labels, &gold_labels)?,
            });
            files.insert(metrics_name, io::to_json_pretty(&metrics)?.into_bytes());
            files.insert(
                assignment_name,
                assignment_csv(&eval, &assignment.labels).into_bytes(),
            );
        }
    }
    io::write_stage(&dir, &files)?;
    Ok(CellState::Computed)
}

/// Runs the full experimental grid. Independent cells execute on a bounded
/// worker pool; a failing cell is recorded in the manifest and the other
/// cells continue. Returns the manifest, or a partial-failure error after
/// writing it.
pub fn cmd_pipeline(config: &RunConfig, options: &PipelineOptions) -> Result<RunManifest> {
    config.validate()?;
    let mut timings: BTreeMap<String, u128> = BTreeMap::new();
    let planned: Vec<(ClusteringId, VariantTag, usize)> = config
        .clusterings
        .iter()
        .flat_map(|&ci| {
            config
                .variants
                .iter()
                .flat_map(move |&gj| (1..=5usize).map(move |fold| (ci, gj, fold)))
        })
        .collect();
    let planned_names: Vec<String> = planned
        .iter()
        .map(|&(ci, gj, fold)| cell_name(ci, gj, fold))
        .collect();

    if options.dry_run {
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            input_checksum: String::new(),
            dry_run: true,
            planned_cells: planned_names,
            cells: BTreeMap::new(),
            artifact_checksums: BTreeMap::new(),
            timings_ms: timings,
        };
        io::ensure_dir(&config.out)?;
        io::write_atomic(
            &config.out.join("manifest.json"),
            io::to_json_pretty(&manifest)?.as_bytes(),
        )?;
        return Ok(manifest);
    }

    let started = Instant::now();
    let golds = cmd_gold(config)?;
    timings.insert("gold".to_string(), started.elapsed().as_millis());

    let started = Instant::now();
    cmd_saturate(config)?;
    timings.insert("saturate".to_string(), started.elapsed().as_millis());

    let ctx = load_cell_context(config, golds)?;
    let input_checksum = prepare_input(config)?.1;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<(String, CellState, u128)> = pool.install(|| {
        use rayon::prelude::*;
        planned
            .par_iter()
            .map(|&(ci, gj, fold)| {
                let name = cell_name(ci, gj, fold);
                let started = Instant::now();
                let state = match run_cell(&ctx, ci, gj, fold) {
                    Ok(state) => state,
                    Err(e) => CellState::Failed(e.to_string()),
                };
                (name, state, started.elapsed().as_millis())
            })
            .collect()
    });

    let mut cells = BTreeMap::new();
    for (name, state, ms) in results {
        timings.insert(format!("cell.{name}"), ms);
        cells.insert(name, state);
    }
    let failed = cells
        .values()
        .filter(|s| matches!(s, CellState::Failed(_)))
        .count();
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        input_checksum,
        dry_run: false,
        planned_cells: planned_names,
        cells,
        artifact_checksums: io::collect_checksums(&config.out),
        timings_ms: timings,
    };
    io::write_atomic(
        &config.out.join("manifest.json"),
        io::to_json_pretty(&manifest)?.as_bytes(),
    )?;
    if failed > 0 {
        return Err(Error::PartialFailure {
            failed,
            total: manifest.planned_cells.len(),
        });
    }
    report::cmd_report(&config.out)?;
    Ok(manifest)
}

/// Reads an embeddings CSV (as written by the cells) into IRI order.
pub fn read_embeddings_csv(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let text = io::read_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty file", path.display())))?;
    let dims = header.split(',').count() - 1;
    let mut iris = Vec::new();
    let mut values = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let iri = fields
            .next()
            .ok_or_else(|| Error::Parse {
                line: no + 2,
                message: "missing iri".into(),
            })?
            .to_string();
        let row: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line: no + 2,
                    message: format!("bad number `{f}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != dims {
            return Err(Error::Parse {
                line: no + 2,
                message: format!("expected {dims} values, found {}", row.len()),
            });
        }
        iris.push(iri);
        values.extend(row);
    }
    let rows = iris.len();
    let matrix = Array2::from_shape_vec((rows, dims), values)
        .map_err(|e| Error::Shape(e.to_string()))?;
    Ok((iris, matrix))
}

/// Reads an assignment CSV (iri,label).
pub fn read_assignment_csv(path: &Path) -> Result<(Vec<String>, Vec<u32>)> {
    let text = io::read_string(path)?;
    let mut iris = Vec::new();
    let mut labels = Vec::new();
    for (no, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let (iri, label) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: no + 1,
            message: "expected `iri,label`".into(),
        })?;
        iris.push(iri.to_string());
        labels.push(label.parse::<u32>().map_err(|e| Error::Parse {
            line: no + 1,
            message: format!("bad label `{label}`: {e}"),
        })?);
    }
    Ok((iris, labels))
}

/// `cluster` subcommand: clusters an embeddings CSV and writes an
/// assignment CSV.
pub fn cmd_cluster_file(
    embeddings: &Path,
    algorithm: Algorithm,
    parameter: usize,
    xi: f64,
    output: &Path,
) -> Result<()> {
    let (iris, matrix) = read_embeddings_csv(embeddings)?;
    let assignment = match algorithm {
        Algorithm::Ward => ward_cluster(&matrix.view(), parameter)?,
        Algorithm::Single => single_cluster(&matrix.view(), parameter)?,
        Algorithm::Optics => optics_cluster(&matrix.view(), parameter, xi)?,
    };
    io::write_atomic(
        output,
        assignment_csv(&iris, &assignment.labels).into_bytes().as_slice(),
    )
}

/// `evaluate` subcommand: scores an assignment CSV against a gold file.
pub fn cmd_evaluate_file(assignment: &Path, gold: &Path, output: &Path) -> Result<()> {
    let (iris, pred) = read_assignment_csv(assignment)?;
    let gold_file: GoldFile = io::read_json(gold)?;
    let gold_labels: Vec<u32> = iris
        .iter()
        .map(|iri| {
            gold_file
                .clustering
                .label_of(iri)
                .ok_or_else(|| Error::Config(format!("no gold label for `{iri}`")))
        })
        .collect::<Result<_>>()?;
    let metrics = FoldMetrics {
        acc: accuracy(&pred, &gold_labels)?,
        ari: adjusted_rand_index(&pred, &gold_labels)?,
        nmi: normalized_mutual_information(&pred, &gold_labels)?,
    };
    io::write_atomic(output, io::to_json_pretty(&metrics)?.as_bytes())
}

/// `distances` subcommand: per-relation linked-pair distances over the
/// nodes present in the embeddings CSV (optionally restricted to a node
/// list file, one IRI per line).
pub fn cmd_distances_file(
    embeddings: &Path,
    links: &Path,
    nodes: Option<&Path>,
    output: &Path,
) -> Result<()> {
    let (iris, matrix) = read_embeddings_csv(embeddings)?;
    let links: Vec<AlignmentLink> = io::read_json(links)?;
    let row_of: BTreeMap<String, usize> = iris
        .iter()
        .enumerate()
        .map(|(i, iri)| (iri.clone(), i))
        .collect();
    let universe: BTreeSet<String> = match nodes {
        Some(path) => io::read_string(path)?
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.to_string())
            .collect(),
        None => iris.iter().cloned().collect(),
    };
    let distributions = distance_analysis(&matrix.view(), &row_of, &links, &universe)?;
    io::write_atomic(output, distances_csv(&distributions).into_bytes().as_slice())
}

/// `train` subcommand: one cell's training stage inside a prepared run
/// directory (gold and variant stages are computed if missing).
pub fn cmd_train_cell(
    config: &RunConfig,
    ci: ClusteringId,
    gj: VariantTag,
    fold: usize,
) -> Result<()> {
    if !(1..=5).contains(&fold) {
        return Err(Error::Parameter(format!("fold {fold} out of 1..=5")));
    }
    if !config.clusterings.contains(&ci) || !config.variants.contains(&gj) {
        return Err(Error::Config(format!(
            "cell {} is outside the configured grid",
            cell_name(ci, gj, fold)
        )));
    }
    let golds = cmd_gold(config)?;
    cmd_saturate(config)?;
    let ctx = load_cell_context(config, golds)?;
    run_cell(&ctx, ci, gj, fold)?;
    Ok(())
}
