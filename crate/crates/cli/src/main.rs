use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use isa_core::config::RunConfig;
use isa_core::pipeline::{synth_to_file, StageError, Workspace};
use isa_core::plot::{Layer, PlotOptions};
use isa_core::synth::{self, SynthSpec};

const USAGE_EXIT: u8 = 2;

/// Instance space analysis of technique performance meta-data.
///
/// Exit codes: 0 success, 2 usage or configuration error, 10 ingest,
/// 11 features-cfg, 12 prep, 13 select, 14 project, 15 footprints,
/// 16 boundary, 17 plot, 18 report, 19 recommend, 20 synth.
#[derive(Parser, Debug)]
#[command(name = "isa", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Output directory shared by all stages.
    #[arg(long, global = true, default_value = "isa_out")]
    out: PathBuf,
    /// File of `key = value` lines; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epsilon_good: Option<f64>,
    /// `absolute` or `relative`.
    #[arg(long, global = true)]
    goodness_rule: Option<String>,
    #[arg(long, global = true)]
    spearman_floor: Option<f64>,
    #[arg(long, global = true)]
    duplicate_rho: Option<f64>,
    #[arg(long, global = true)]
    boundary_threshold: Option<f64>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true)]
    candidate_cap: Option<usize>,
    #[arg(long, global = true)]
    kmeans_restarts: Option<usize>,
    #[arg(long, global = true)]
    forest_trees: Option<usize>,
    #[arg(long, global = true)]
    cv_folds: Option<usize>,
    #[arg(long, global = true)]
    k_clusters: Option<usize>,
    /// Fixed alpha-shape radius; omitted means the smallest connecting radius.
    #[arg(long, global = true)]
    alpha_radius: Option<f64>,
    /// `product` or `geometric-mean`.
    #[arg(long, global = true)]
    epsilon_scale: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate meta-data and write the canonical copy.
    Ingest(IngestArgs),
    /// Compute CFG features from graph JSON files or directories.
    FeaturesCfg {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Outlier clamping, Box-Cox, standardisation and feature filtering.
    Prep,
    /// Cluster features and choose the subset used for projection.
    Select,
    /// Fit the 2-D projection.
    Project,
    /// Good and best footprints with their metrics.
    Footprints,
    /// Estimated boundary of the instance space.
    Boundary,
    /// Render SVG plots.
    Plot {
        /// `sources`, `performance:<technique>`, `feature:<name>`,
        /// `footprints`, `footprints:<technique>` or `boundary`. Repeatable;
        /// omitted means every layer.
        #[arg(long = "layer")]
        layers: Vec<String>,
        /// Draw the z1 = 0 and z2 = 0 quadrant lines.
        #[arg(long)]
        quadrants: bool,
    },
    /// Markdown summary of the footprint table.
    Report,
    /// Recommend techniques for the instances in a feature table CSV.
    Recommend { input: PathBuf },
    /// Write synthetic meta-data.
    Synth {
        /// Built-in spec name.
        #[arg(long, conflicts_with = "spec", default_value = "two-cluster")]
        preset: String,
        /// JSON spec file.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Destination file; defaults to `<out>/synth.csv`.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Every stage from ingest through report.
    Run(IngestArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Meta-data CSV.
    input: PathBuf,
    /// CFG feature table to join by instance id.
    #[arg(long)]
    cfg_features: Option<PathBuf>,
}

fn build_config(g: &Global) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &g.config {
        let text = std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
        cfg.apply_text(&text)?;
    }
    let overrides: [(&str, Option<String>); 14] = [
        ("seed", g.seed.map(|v| v.to_string())),
        ("epsilon_good", g.epsilon_good.map(|v| v.to_string())),
        ("goodness_rule", g.goodness_rule.clone()),
        ("spearman_floor", g.spearman_floor.map(|v| v.to_string())),
        ("duplicate_rho", g.duplicate_rho.map(|v| v.to_string())),
        ("boundary_threshold", g.boundary_threshold.map(|v| v.to_string())),
        ("restarts", g.restarts.map(|v| v.to_string())),
        ("candidate_cap", g.candidate_cap.map(|v| v.to_string())),
        ("kmeans_restarts", g.kmeans_restarts.map(|v| v.to_string())),
        ("forest_trees", g.forest_trees.map(|v| v.to_string())),
        ("cv_folds", g.cv_folds.map(|v| v.to_string())),
        ("k_clusters", g.k_clusters.map(|v| v.to_string())),
        ("alpha_radius", g.alpha_radius.map(|v| v.to_string())),
        ("epsilon_scale", g.epsilon_scale.clone()),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn synth_spec(preset: &str, spec: Option<&Path>) -> anyhow::Result<SynthSpec> {
    match spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
            Ok(SynthSpec::parse(&text)?)
        }
        None => Ok(synth::preset(preset)?),
    }
}

fn execute(ws: &Workspace, command: Command) -> Result<(), StageError> {
    match command {
        Command::Ingest(a) => ws.ingest(&a.input, a.cfg_features.as_deref()).map(drop),
        Command::FeaturesCfg { inputs } => ws.features_cfg(&inputs).map(drop),
        Command::Prep => ws.prep().map(drop),
        Command::Select => ws.select().map(drop),
        Command::Project => ws.project().map(drop),
        Command::Footprints => ws.footprints().map(drop),
        Command::Boundary => ws.boundary().map(drop),
        Command::Plot { layers, quadrants } => {
            let parsed: Option<Vec<Layer>> = if layers.is_empty() {
                None
            } else {
                Some(
                    layers
                        .iter()
                        .map(|l| l.parse())
                        .collect::<Result<_, _>>()
                        .map_err(|source| StageError {
                            stage: isa_core::pipeline::Stage::Plot,
                            source,
                        })?,
                )
            };
            ws.plot(parsed.as_deref(), &PlotOptions { quadrants }).map(drop)
        }
        Command::Report => ws.report().map(drop),
        Command::Recommend { input } => {
            for (id, r) in ws.recommend(&input)? {
                let names: Vec<&str> = r.ranked.iter().map(|x| x.technique.as_str()).collect();
                let tag = if r.fallback { " (fallback)" } else { "" };
                println!("{id}: {}{tag}", names.join(", "));
            }
            Ok(())
        }
        Command::Synth { .. } => unreachable!("handled before stage dispatch"),
        Command::Run(a) => ws.run(&a.input, a.cfg_features.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let config = match build_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            error!("configuration: {e}");
            return ExitCode::from(USAGE_EXIT);
        }
    };
    let ws = match Workspace::new(&cli.global.out, config) {
        Ok(ws) => ws,
        Err(e) => {
            error!("configuration: {e}");
            return ExitCode::from(USAGE_EXIT);
        }
    };
    let result = match cli.command {
        Command::Synth { preset, spec, file } => {
            let spec = match synth_spec(&preset, spec.as_deref()) {
                Ok(s) => s,
                Err(e) => {
                    error!("synth: {e}");
                    return ExitCode::from(isa_core::pipeline::Stage::Synth.exit_code() as u8);
                }
            };
            let path = file.unwrap_or_else(|| ws.path("synth.csv"));
            synth_to_file(&spec, ws.config.seed, &path, &ws.fingerprint).map(drop)
        }
        command => execute(&ws, command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.stage.exit_code() as u8)
        }
    }
}
