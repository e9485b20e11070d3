use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use kgmatch::alignment::ClusteringId;
use kgmatch::clustering::Algorithm;
use kgmatch::pipeline::{self, PipelineOptions, RunConfig};
use kgmatch::saturation::VariantTag;
use kgmatch::synth::SynthConfig;
use kgmatch::Error;

/// Knowledge-graph node matching: saturation, GCN embeddings, clustering.
#[derive(Parser)]
#[command(name = "kgmatch", version, about)]
struct Cli {
    /// Override the run seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory from the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Plan only; write no outputs beyond the planning manifest.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Worker threads for independent pipeline cells.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph and its ground-truth ledger.
    Synthgen {
        /// Optional run config whose [input.synth] table to use; defaults
        /// otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Build the requested graph variants, reduced to the candidate
    /// neighborhood.
    Saturate(ConfigArg),
    /// Compute gold clusterings and fold splits from the alignment links.
    GoldClusters(ConfigArg),
    /// Train one (clustering, variant, fold) cell.
    Train {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        clustering: String,
        #[arg(long)]
        variant: String,
        #[arg(long)]
        fold: usize,
    },
    /// Cluster an embeddings CSV into an assignment CSV.
    Cluster {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        algorithm: String,
        /// Cluster count (ward/single) or minimum cluster size (optics).
        #[arg(long)]
        parameter: usize,
        #[arg(long, default_value_t = kgmatch::clustering::DEFAULT_XI)]
        xi: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score an assignment CSV against a gold clustering file.
    Evaluate {
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Per-relation linked-pair distances from an embeddings CSV.
    Distances {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        links: PathBuf,
        /// Optional node list (one IRI per line) restricting the pairs.
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run the full grid: saturate, gold clusters, train, cluster,
    /// evaluate, distances, report.
    Pipeline(ConfigArg),
    /// Consolidate a finished run directory into result tables.
    Report {
        /// Run directory (defaults to --out).
        #[arg(long)]
        run: Option<PathBuf>,
    },
}

fn load(cli_seed: Option<u64>, cli_out: &Option<PathBuf>, path: &Path) -> Result<RunConfig, Error> {
    let mut config = pipeline::load_config(path)?;
    if let Some(seed) = cli_seed {
        config.seed = seed;
    }
    if let Some(out) = cli_out {
        config.out = out.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synthgen { config } => {
            let (synth, out) = match config {
                Some(path) => {
                    let config = load(cli.seed, &cli.out, &path)?;
                    let synth = config.input.synth.clone().ok_or_else(|| {
                        Error::Config("config has no [input.synth] table".into())
                    })?;
                    (synth, config.out)
                }
                None => {
                    let mut synth = SynthConfig::default();
                    if let Some(seed) = cli.seed {
                        synth.seed = seed;
                    }
                    let out = cli.out.clone().ok_or_else(|| {
                        Error::Config("--out is required without a config file".into())
                    })?;
                    (synth, out)
                }
            };
            if cli.dry_run {
                println!("would write {}/input/graph.nt and ledger.json", out.display());
                return Ok(());
            }
            pipeline::cmd_synthgen(&synth, &out)?;
            println!("wrote {}/input/graph.nt", out.display());
            Ok(())
        }
        Command::Saturate(args) => {
            let config = load(cli.seed, &cli.out, &args.config)?;
            if cli.dry_run {
                for v in &config.variants {
                    println!("would build variant {v} under {}", config.out.display());
                }
                return Ok(());
            }
            for (tag, report) in pipeline::cmd_saturate(&config)? {
                println!(
                    "{tag}: {} nodes, {} edges, {} predicates (+{} triples, {} merged, {} inverses)",
                    report.after.node_count,
                    report.after.edge_count,
                    report.after.predicate_count,
                    report.added_triples,
                    report.merged_nodes,
                    report.abstract_inverses_added
                );
            }
            Ok(())
        }
        Command::GoldClusters(args) => {
            let config = load(cli.seed, &cli.out, &args.config)?;
            if cli.dry_run {
                for c in &config.clusterings {
                    println!("would compute gold clustering {c}");
                }
                return Ok(());
            }
            for (ci, file) in pipeline::cmd_gold(&config)? {
                println!(
                    "{ci}: {} clusters over {} candidates",
                    file.clustering.cluster_sizes.len(),
                    file.clustering.labels.len()
                );
            }
            Ok(())
        }
        Command::Train {
            config,
            clustering,
            variant,
            fold,
        } => {
            let config = load(cli.seed, &cli.out, &config.config)?;
            let ci = ClusteringId::from_str(&clustering)?;
            let gj = VariantTag::from_str(&variant)?;
            if cli.dry_run {
                println!("would train cell {}", pipeline::cell_name(ci, gj, fold));
                return Ok(());
            }
            pipeline::cmd_train_cell(&config, ci, gj, fold)?;
            println!("trained cell {}", pipeline::cell_name(ci, gj, fold));
            Ok(())
        }
        Command::Cluster {
            embeddings,
            algorithm,
            parameter,
            xi,
            output,
        } => {
            let algorithm = Algorithm::from_str(&algorithm)?;
            if cli.dry_run {
                println!("would cluster {} into {}", embeddings.display(), output.display());
                return Ok(());
            }
            pipeline::cmd_cluster_file(&embeddings, algorithm, parameter, xi, &output)
        }
        Command::Evaluate {
            assignment,
            gold,
            output,
        } => {
            if cli.dry_run {
                println!("would evaluate {} against {}", assignment.display(), gold.display());
                return Ok(());
            }
            pipeline::cmd_evaluate_file(&assignment, &gold, &output)
        }
        Command::Distances {
            embeddings,
            links,
            nodes,
            output,
        } => {
            if cli.dry_run {
                println!("would compute distances from {}", embeddings.display());
                return Ok(());
            }
            pipeline::cmd_distances_file(&embeddings, &links, nodes.as_deref(), &output)
        }
        Command::Pipeline(args) => {
            let config = load(cli.seed, &cli.out, &args.config)?;
            let options = PipelineOptions {
                jobs: cli.jobs,
                dry_run: cli.dry_run,
            };
            let manifest = pipeline::cmd_pipeline(&config, &options)?;
            if cli.dry_run {
                println!("planned {} cells (dry run)", manifest.planned_cells.len());
            } else {
                println!(
                    "completed {} cells into {}",
                    manifest.cells.len(),
                    config.out.display()
                );
            }
            Ok(())
        }
        Command::Report { run } => {
            let dir = run
                .or(cli.out.clone())
                .ok_or_else(|| Error::Config("report needs --run or --out".into()))?;
            if cli.dry_run {
                println!("would consolidate {}", dir.display());
                return Ok(());
            }
            let rows = pipeline::cmd_report(&dir)?;
            println!("wrote {} report rows to {}/report/", rows.len(), dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::PartialFailure { failed, total }) => {
            eprintln!("error: {failed} of {total} cells failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
