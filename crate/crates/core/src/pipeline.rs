//! Stage orchestration over an output directory. Each stage reads the files
//! written by earlier stages, checks their config fingerprint and writes its
//! own stamped outputs, so stages can be rerun individually.

use std::path::{Path, PathBuf};

use log::info;
use nalgebra::DMatrix;

use crate::artifact::{self, Coordinates};
use crate::boundary::{self, BoundarySpec};
use crate::cfgfeat;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::featsel::{self, FeatselConfig, ForestConfig};
use crate::footprint::{self, Footprint, FootprintKind, FootprintSet, SpaceBaseline};
use crate::geometry::Pt;
use crate::metadata::{self, GoodnessMatrix, Metadata};
use crate::pilot::{self, PilotConfig, PilotFit, Projection};
use crate::plot::{self, Layer, PlotData, PlotOptions};
use crate::prep::{self, PrepReport};
use crate::recommend::{self, Recommendation};
use crate::seed;
use crate::stats;
use crate::synth::{self, SynthSpec};

pub mod files {
    pub const METADATA: &str = "metadata.csv";
    pub const CFG_FEATURES: &str = "cfg_features.csv";
    pub const PREP: &str = "prep.csv";
    pub const PREP_REPORT: &str = "prep_report.csv";
    pub const PREP_PARAMS: &str = "prep_params.json";
    pub const FEATSEL_REPORT: &str = "featsel_report.csv";
    pub const COORDINATES: &str = "coordinates.csv";
    pub const PROJECTION: &str = "projection.json";
    pub const PILOT_RESTARTS: &str = "pilot_restarts.csv";
    pub const FOOTPRINT_SUMMARY: &str = "footprint_summary.csv";
    pub const FOOTPRINT_DIR: &str = "footprints";
    pub const BOUNDARY: &str = "boundary.geojson";
    pub const BOUNDARY_REPORT: &str = "boundary_report.txt";
    pub const PLOT_DIR: &str = "plots";
    pub const REPORT: &str = "report.md";
    pub const RECOMMENDATIONS: &str = "recommendations.csv";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    FeaturesCfg,
    Prep,
    Select,
    Project,
    Footprints,
    Boundary,
    Plot,
    Report,
    Recommend,
    Synth,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::Ingest,
        Stage::FeaturesCfg,
        Stage::Prep,
        Stage::Select,
        Stage::Project,
        Stage::Footprints,
        Stage::Boundary,
        Stage::Plot,
        Stage::Report,
        Stage::Recommend,
        Stage::Synth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::FeaturesCfg => "features-cfg",
            Stage::Prep => "prep",
            Stage::Select => "select",
            Stage::Project => "project",
            Stage::Footprints => "footprints",
            Stage::Boundary => "boundary",
            Stage::Plot => "plot",
            Stage::Report => "report",
            Stage::Recommend => "recommend",
            Stage::Synth => "synth",
        }
    }

    /// Process exit code when this stage fails. Usage and configuration
    /// errors exit with 2.
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Ingest => 10,
            Stage::FeaturesCfg => 11,
            Stage::Prep => 12,
            Stage::Select => 13,
            Stage::Project => 14,
            Stage::Footprints => 15,
            Stage::Boundary => 16,
            Stage::Plot => 17,
            Stage::Report => 18,
            Stage::Recommend => 19,
            Stage::Synth => 20,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{} failed: {source}", stage.name())]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub type StageResult<T> = std::result::Result<T, StageError>;

trait InStage<T> {
    fn in_stage(self, stage: Stage) -> StageResult<T>;
}

impl<T> InStage<T> for Result<T> {
    fn in_stage(self, stage: Stage) -> StageResult<T> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Standardises each row to zero mean and unit population deviation; a
/// constant row becomes zeros.
pub fn standardize_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        let (mu, sd) = (stats::mean(&row), stats::std_pop(&row));
        for c in 0..m.ncols() {
            out[(r, c)] = if sd > 0.0 { (m[(r, c)] - mu) / sd } else { 0.0 };
        }
    }
    out
}

/// Spearman correlation matrix between the rows of `f`.
pub fn feature_correlations(f: &DMatrix<f64>) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = f.row_iter().map(|r| r.iter().copied().collect()).collect();
    let n = rows.len();
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            1.0
        } else {
            stats::spearman(&rows[a], &rows[b])
        }
    })
}

/// Reads the `features` column of the selected row of a selection report.
pub fn parse_selected_features(text: &str) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::FeatureSelection(format!("report has no `{name}` column")))
    };
    let (fcol, scol) = (col("features")?, col("selected")?);
    let mut chosen = None;
    for rec in rdr.records() {
        let rec = rec?;
        if &rec[scol] == "true" {
            if chosen.is_some() {
                return Err(Error::FeatureSelection(
                    "report marks more than one candidate as selected".into(),
                ));
            }
            chosen = Some(rec[fcol].split(';').map(str::to_string).collect::<Vec<_>>());
        }
    }
    chosen.ok_or_else(|| Error::FeatureSelection("report marks no candidate as selected".into()))
}

/// File name of one footprint's GeoJSON inside the footprint directory.
pub fn footprint_file(technique_index: usize, technique: &str, kind: FootprintKind) -> String {
    let clean: String = technique
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{technique_index:02}_{clean}_{}.geojson", kind.as_str())
}

/// An output directory plus the configuration every stage runs under.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub out: PathBuf,
    pub config: RunConfig,
    pub fingerprint: String,
}

impl Workspace {
    pub fn new(out: impl Into<PathBuf>, config: RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            out: out.into(),
            fingerprint: config.fingerprint(),
            config,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn stamp(&self) -> String {
        artifact::stamp(&self.fingerprint)
    }

    fn write(&self, stage: Stage, name: &str, text: &str) -> StageResult<PathBuf> {
        let p = self.path(name);
        artifact::write_text(&p, text).in_stage(stage)?;
        info!("{}: wrote {}", stage.name(), p.display());
        Ok(p)
    }

    fn read(&self, name: &str) -> Result<String> {
        artifact::read_stamped(&self.path(name), &self.fingerprint)
    }

    fn read_json(&self, name: &str) -> Result<String> {
        artifact::read_stamped_json(&self.path(name), &self.fingerprint)
    }

    fn goodness(&self, md: &Metadata) -> Result<GoodnessMatrix> {
        metadata::compute_goodness_with(md, self.config.epsilon_good, self.config.goodness_rule)
    }

    /// Loads the preprocessed meta-data written by `prep`.
    pub fn load_prepared(&self) -> Result<Metadata> {
        metadata::parse_metadata(&self.read(files::PREP)?)
    }

    pub fn load_selected(&self) -> Result<Vec<String>> {
        parse_selected_features(&self.read(files::FEATSEL_REPORT)?)
    }

    pub fn load_projection(&self) -> Result<Projection> {
        Projection::from_json(&self.read_json(files::PROJECTION)?)
    }

    pub fn load_coordinates(&self, md: &Metadata) -> Result<Coordinates> {
        let c = artifact::parse_coordinates(&self.read(files::COORDINATES)?)?;
        if c.instance_ids != md.instance_ids() {
            return Err(Error::artifact(
                self.path(files::COORDINATES),
                "instances differ from the preprocessed meta-data",
            ));
        }
        Ok(c)
    }

    pub fn load_prep_params(&self) -> Result<PrepReport> {
        Ok(serde_json::from_str(&self.read_json(files::PREP_PARAMS)?)?)
    }

    pub fn load_footprints(&self, technique_names: &[String], kind: FootprintKind) -> Result<Vec<Footprint>> {
        technique_names
            .iter()
            .enumerate()
            .map(|(j, t)| {
                let p = self.path(files::FOOTPRINT_DIR).join(footprint_file(j, t, kind));
                let text = artifact::read_text(&p)?;
                let (fp, print) = footprint::parse_footprint_geojson(&text)?;
                artifact::check_fingerprint(&p, Some(&print), &self.fingerprint)?;
                if fp.technique != *t || fp.kind != kind {
                    return Err(Error::artifact(
                        &p,
                        "footprint technique or kind does not match its file name",
                    ));
                }
                Ok(fp)
            })
            .collect()
    }

    pub fn load_boundary(&self) -> Result<Vec<Pt>> {
        let p = self.path(files::BOUNDARY);
        let (hull, print) = boundary::parse_boundary_geojson(&artifact::read_text(&p)?)?;
        artifact::check_fingerprint(&p, Some(&print), &self.fingerprint)?;
        Ok(hull)
    }

    /// Validates the input meta-data, optionally joins a CFG feature table,
    /// and writes the canonical meta-data file.
    pub fn ingest(&self, input: &Path, cfg_features: Option<&Path>) -> StageResult<Metadata> {
        let s = Stage::Ingest;
        let mut md = metadata::load_metadata(input).in_stage(s)?;
        if let Some(path) = cfg_features {
            let text = artifact::read_text(path).in_stage(s)?;
            let table = metadata::parse_feature_table(&text).in_stage(s)?;
            md = md.join_features(&table.feature_names, &table.as_map()).in_stage(s)?;
        }
        self.write(
            s,
            files::METADATA,
            &metadata::write_metadata_csv(&md, Some(&self.stamp())),
        )?;
        info!(
            "ingest: {} instances, {} features, {} techniques",
            md.n_instances(),
            md.feature_names().len(),
            md.technique_names().len()
        );
        Ok(md)
    }

    /// Computes class-level CFG features from graph documents. Directories
    /// contribute their `*.json` files in name order.
    pub fn features_cfg(&self, inputs: &[PathBuf]) -> StageResult<PathBuf> {
        let s = Stage::FeaturesCfg;
        let mut docs = Vec::new();
        for p in inputs {
            if p.is_dir() {
                let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                    .map_err(|e| Error::io(p, e))
                    .in_stage(s)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|q| q.extension().is_some_and(|x| x == "json"))
                    .collect();
                entries.sort();
                docs.extend(entries);
            } else {
                docs.push(p.clone());
            }
        }
        if docs.is_empty() {
            return Err(Error::Graph {
                method: "*".into(),
                message: "no graph documents given".into(),
            })
            .in_stage(s);
        }
        let mut rows = Vec::with_capacity(docs.len());
        for d in &docs {
            let g = cfgfeat::load_class_graphs(d).in_stage(s)?;
            rows.push((g.class.clone(), cfgfeat::class_features(&g.methods).in_stage(s)?));
        }
        self.write(
            s,
            files::CFG_FEATURES,
            &cfgfeat::write_features_csv(&rows, Some(&self.stamp())),
        )
    }

    pub fn prep(&self) -> StageResult<prep::Prepared> {
        let s = Stage::Prep;
        let md = metadata::parse_metadata(&self.read(files::METADATA).in_stage(s)?).in_stage(s)?;
        let p = prep::preprocess(&md, self.config.spearman_floor, self.config.duplicate_rho).in_stage(s)?;
        self.write(
            s,
            files::PREP,
            &metadata::write_metadata_csv(&p.metadata, Some(&self.stamp())),
        )?;
        self.write(s, files::PREP_REPORT, &p.report.to_csv(Some(&self.stamp())))?;
        let mut params = serde_json::to_value(&p.report).map_err(Error::from).in_stage(s)?;
        params["fingerprint"] = serde_json::Value::String(self.fingerprint.clone());
        let text = serde_json::to_string_pretty(&params).map_err(Error::from).in_stage(s)? + "\n";
        self.write(s, files::PREP_PARAMS, &text)?;
        info!(
            "prep: retained {} of {} features",
            p.metadata.feature_names().len(),
            md.feature_names().len()
        );
        Ok(p)
    }

    pub fn featsel_config(&self) -> FeatselConfig {
        FeatselConfig {
            k: self.config.k_clusters,
            kmeans_restarts: self.config.kmeans_restarts,
            candidate_cap: self.config.candidate_cap,
            forest: ForestConfig {
                trees: self.config.forest_trees,
                max_features: None,
                folds: self.config.cv_folds,
            },
            seed: seed::derive(self.config.seed, &[1]),
        }
    }

    /// Returns the selected feature names.
    pub fn select(&self) -> StageResult<Vec<String>> {
        let s = Stage::Select;
        let md = self.load_prepared().in_stage(s)?;
        let good = self.goodness(&md).in_stage(s)?;
        let sel = featsel::run_selection(&md, &good, &self.featsel_config()).in_stage(s)?;
        let csv = sel.to_csv(md.feature_names(), md.technique_names(), Some(&self.stamp()));
        self.write(s, files::FEATSEL_REPORT, &csv)?;
        let names: Vec<String> = sel
            .selected_features()
            .iter()
            .map(|&k| md.feature_names()[k].clone())
            .collect();
        info!("select: k = {}, chose {}", sel.clusters.k, names.join(", "));
        Ok(names)
    }

    fn selected_matrix(md: &Metadata, names: &[String]) -> Result<DMatrix<f64>> {
        let rows = names
            .iter()
            .map(|n| {
                md.feature_index(n).ok_or_else(|| {
                    Error::FeatureSelection(format!("selected feature `{n}` is not in the preprocessed data"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(md.features().select_rows(rows.iter()))
    }

    pub fn project(&self) -> StageResult<PilotFit> {
        let s = Stage::Project;
        let md = self.load_prepared().in_stage(s)?;
        let names = self.load_selected().in_stage(s)?;
        let f = Self::selected_matrix(&md, &names).in_stage(s)?;
        let y = standardize_rows(md.performance());
        let cfg = PilotConfig {
            restarts: self.config.restarts,
            seed: seed::derive(self.config.seed, &[2]),
            ..Default::default()
        };
        let fit = pilot::fit_projection(&f, &y, &names, md.technique_names(), &cfg).in_stage(s)?;
        let z = fit.projection.coordinates(&f);
        let coords = Coordinates {
            instance_ids: md.instance_ids().to_vec(),
            z: (0..z.ncols()).map(|c| [z[(0, c)], z[(1, c)]]).collect(),
            sources: md
                .sources()
                .map(<[String]>::to_vec)
                .unwrap_or_else(|| vec![String::new(); md.n_instances()]),
        };
        self.write(
            s,
            files::COORDINATES,
            &artifact::write_coordinates(&coords, Some(&self.stamp())),
        )?;
        self.write(s, files::PROJECTION, &fit.projection.to_json(&self.fingerprint))?;
        let mut restarts = format!(
            "# {}\nrestart_id,objective,topo_preservation,iterations,termination\n",
            self.stamp()
        );
        for r in &fit.restarts {
            restarts.push_str(&format!(
                "{},{},{},{},{:?}\n",
                r.restart_id, r.objective, r.topo_preservation, r.iterations, r.termination
            ));
        }
        self.write(s, files::PILOT_RESTARTS, &restarts)?;
        info!(
            "project: restart {} selected, objective {:.6}, topological preservation {:.4}",
            fit.projection.restart_id, fit.projection.objective, fit.projection.topo_preservation
        );
        Ok(fit)
    }

    pub fn footprints(&self) -> StageResult<FootprintSet> {
        let s = Stage::Footprints;
        let md = self.load_prepared().in_stage(s)?;
        let coords = self.load_coordinates(&md).in_stage(s)?;
        let good = self.goodness(&md).in_stage(s)?;
        let baseline = SpaceBaseline::new(&coords.z).in_stage(s)?;
        let set = footprint::build_footprints(
            md.technique_names(),
            &coords.z,
            &good,
            &baseline,
            &self.config.footprint_config(),
        )
        .in_stage(s)?;
        let summary = footprint::summary_csv(&set.summary_rows(), Some(&self.stamp()));
        self.write(s, files::FOOTPRINT_SUMMARY, &summary)?;
        for fp in set.good.iter().chain(&set.best) {
            let name = format!(
                "{}/{}",
                files::FOOTPRINT_DIR,
                footprint_file(fp.technique_index, &fp.technique, fp.kind)
            );
            self.write(s, &name, &footprint::footprint_to_geojson(fp, &self.fingerprint))?;
        }
        Ok(set)
    }

    pub fn boundary(&self) -> StageResult<BoundarySpec> {
        let s = Stage::Boundary;
        let md = self.load_prepared().in_stage(s)?;
        let names = self.load_selected().in_stage(s)?;
        let proj = self.load_projection().in_stage(s)?;
        if proj.feature_names != names {
            return Err(Error::artifact(
                self.path(files::PROJECTION),
                "projection features differ from the selected features",
            ))
            .in_stage(s);
        }
        let coords = self.load_coordinates(&md).in_stage(s)?;
        let f = Self::selected_matrix(&md, &names).in_stage(s)?;
        let rho = feature_correlations(&f);
        let spec = boundary::estimate_boundary(&f, &rho, &proj.a, self.config.boundary_threshold).in_stage(s)?;
        self.write(
            s,
            files::BOUNDARY,
            &boundary::boundary_to_geojson(&spec, &self.fingerprint),
        )?;
        self.write(
            s,
            files::BOUNDARY_REPORT,
            &boundary::boundary_report(&spec, &coords.z, &artifact::stamp(&self.fingerprint)),
        )?;
        info!("boundary: {} of {} corners pruned", spec.pruned_count, spec.q);
        Ok(spec)
    }

    /// Default layers: sources, every technique's performance, every
    /// selected feature, all best footprints, each technique's footprints,
    /// and the boundary when it exists.
    pub fn default_layers(&self, md: &Metadata, selected: &[String]) -> Vec<Layer> {
        let mut layers = Vec::new();
        if md.sources().is_some() {
            layers.push(Layer::Sources);
        }
        layers.extend(md.technique_names().iter().map(|t| Layer::Performance(t.clone())));
        layers.extend(selected.iter().map(|f| Layer::Feature(f.clone())));
        layers.push(Layer::Footprints);
        layers.extend(
            md.technique_names()
                .iter()
                .map(|t| Layer::TechniqueFootprints(t.clone())),
        );
        if self.path(files::BOUNDARY).exists() {
            layers.push(Layer::Boundary);
        }
        layers
    }

    pub fn plot(&self, layers: Option<&[Layer]>, opts: &PlotOptions) -> StageResult<Vec<PathBuf>> {
        let s = Stage::Plot;
        let md = self.load_prepared().in_stage(s)?;
        let coords = self.load_coordinates(&md).in_stage(s)?;
        let selected = self.load_selected().unwrap_or_default();
        let layers = match layers {
            Some(l) => l.to_vec(),
            None => self.default_layers(&md, &selected),
        };
        let needs_fp = layers
            .iter()
            .any(|l| matches!(l, Layer::Footprints | Layer::TechniqueFootprints(_)));
        let (good, best) = if needs_fp {
            (
                Some(
                    self.load_footprints(md.technique_names(), FootprintKind::Good)
                        .in_stage(s)?,
                ),
                Some(
                    self.load_footprints(md.technique_names(), FootprintKind::Best)
                        .in_stage(s)?,
                ),
            )
        } else {
            (None, None)
        };
        let hull = if layers.contains(&Layer::Boundary) {
            Some(self.load_boundary().in_stage(s)?)
        } else {
            None
        };
        let data = PlotData {
            z: &coords.z,
            sources: &coords.sources,
            technique_names: md.technique_names(),
            performance: md.performance(),
            feature_names: md.feature_names(),
            features: md.features(),
            good: good.as_deref(),
            best: best.as_deref(),
            boundary: hull.as_deref(),
        };
        let mut written = Vec::new();
        for layer in &layers {
            let svg = plot::render(layer, &data, &self.fingerprint, opts).in_stage(s)?;
            let name = format!("{}/{}.svg", files::PLOT_DIR, layer.file_stem());
            written.push(self.write(s, &name, &svg)?);
        }
        Ok(written)
    }

    /// Markdown summary of the run; returns the report text.
    pub fn report(&self) -> StageResult<String> {
        let s = Stage::Report;
        let rows = footprint::parse_summary_csv(&self.read(files::FOOTPRINT_SUMMARY).in_stage(s)?).in_stage(s)?;
        let proj = self.load_projection().in_stage(s)?;
        let mut out = format!("<!-- {} -->\n# Instance space report\n\n", self.stamp());
        out.push_str(&format!("Selected features: {}\n\n", proj.feature_names.join(", ")));
        out.push_str(&format!(
            "Projection: restart {}, objective {:.6}, topological preservation {:.4}\n\n",
            proj.restart_id, proj.objective, proj.topo_preservation
        ));
        out.push_str("## Footprints\n\n");
        out.push_str(&format!("| {} |\n", footprint::SUMMARY_HEADER.join(" | ")));
        out.push_str(&format!("|{}\n", "---|".repeat(footprint::SUMMARY_HEADER.len())));
        for r in &rows {
            let vals: Vec<String> = r.values().iter().map(|v| format!("{v:.1}")).collect();
            out.push_str(&format!("| {} | {} |\n", r.technique, vals.join(" | ")));
        }
        if let Ok(text) = self.read(files::BOUNDARY_REPORT) {
            out.push_str("\n## Boundary\n\n```\n");
            out.extend(text.lines().skip(1).map(|l| format!("{l}\n")));
            out.push_str("```\n");
        }
        self.write(s, files::REPORT, &out)?;
        Ok(out)
    }

    /// Recommends techniques for each row of a feature table in the raw
    /// (unprocessed) feature scale.
    pub fn recommend(&self, input: &Path) -> StageResult<Vec<(String, Recommendation)>> {
        let s = Stage::Recommend;
        let md = self.load_prepared().in_stage(s)?;
        let params = self.load_prep_params().in_stage(s)?;
        let proj = self.load_projection().in_stage(s)?;
        let coords = self.load_coordinates(&md).in_stage(s)?;
        let good_fps = self
            .load_footprints(md.technique_names(), FootprintKind::Good)
            .in_stage(s)?;
        let good = self.goodness(&md).in_stage(s)?;
        let rates: Vec<f64> = (0..md.technique_names().len()).map(|t| good.good_rate(t)).collect();
        let tol = SpaceBaseline::new(&coords.z).in_stage(s)?.tolerance;
        let table = metadata::parse_feature_table(&artifact::read_text(input).in_stage(s)?).in_stage(s)?;
        let mut out = Vec::with_capacity(table.rows.len());
        let mut csv = format!("# {}\ninstance,z1,z2,techniques,fallback\n", self.stamp());
        for (id, vals) in &table.rows {
            let r =
                recommend::recommend(&params, &proj, &good_fps, &rates, &table.feature_names, vals, tol).in_stage(s)?;
            let techs: Vec<&str> = r.ranked.iter().map(|x| x.technique.as_str()).collect();
            csv.push_str(&format!(
                "{id},{},{},{},{}\n",
                r.z[0],
                r.z[1],
                techs.join(";"),
                r.fallback
            ));
            out.push((id.clone(), r));
        }
        self.write(s, files::RECOMMENDATIONS, &csv)?;
        Ok(out)
    }

    /// Every stage from ingest through report.
    pub fn run(&self, input: &Path, cfg_features: Option<&Path>) -> StageResult<()> {
        self.ingest(input, cfg_features)?;
        self.prep()?;
        self.select()?;
        self.project()?;
        self.footprints()?;
        self.boundary()?;
        self.plot(None, &PlotOptions::default())?;
        self.report()?;
        Ok(())
    }
}

/// Writes synthetic meta-data to `path`, stamped with `fingerprint`.
pub fn synth_to_file(spec: &SynthSpec, seed_base: u64, path: &Path, fingerprint: &str) -> StageResult<Metadata> {
    let s = Stage::Synth;
    let md = synth::synth_metadata(spec, seed_base).in_stage(s)?;
    artifact::write_text(
        path,
        &metadata::write_metadata_csv(&md, Some(&artifact::stamp(fingerprint))),
    )
    .in_stage(s)?;
    info!("synth: wrote {} ({} instances)", path.display(), md.n_instances());
    Ok(md)
}
