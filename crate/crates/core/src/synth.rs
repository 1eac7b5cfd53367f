//! Synthetic meta-data: Gaussian feature clusters and per-cluster technique
//! coverage with noise. The cluster name becomes the instance source.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metadata::Metadata;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub name: String,
    pub size: usize,
    /// Per-feature mean.
    pub mean: Vec<f64>,
    /// Standard deviation shared by every feature.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechniqueSpec {
    pub name: String,
    /// Mean coverage on each cluster, in cluster order.
    pub coverage: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub feature_names: Vec<String>,
    pub clusters: Vec<ClusterSpec>,
    pub techniques: Vec<TechniqueSpec>,
    /// Standard deviation of the coverage noise.
    pub coverage_noise: f64,
}

impl SynthSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: SynthSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Synth(m));
        if self.clusters.is_empty() {
            return err("at least one cluster is required".into());
        }
        if self.techniques.len() < 2 {
            return err("at least two techniques are required".into());
        }
        if self.feature_names.is_empty() {
            return err("at least one feature is required".into());
        }
        let nf = self.feature_names.len();
        for c in &self.clusters {
            if !(c.scale > 0.0 && c.scale.is_finite()) {
                return err(format!("cluster `{}`: scale must be positive, got {}", c.name, c.scale));
            }
            if c.mean.len() != nf || c.mean.iter().any(|m| !m.is_finite()) {
                return err(format!("cluster `{}`: mean needs {nf} finite values", c.name));
            }
            if c.size == 0 {
                return err(format!("cluster `{}` is empty", c.name));
            }
        }
        for t in &self.techniques {
            if t.coverage.len() != self.clusters.len() || t.coverage.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return err(format!(
                    "technique `{}`: coverage needs {} values in [0, 1]",
                    t.name,
                    self.clusters.len()
                ));
            }
        }
        if !(self.coverage_noise >= 0.0 && self.coverage_noise.is_finite()) {
            return err("coverage_noise must be non-negative".into());
        }
        Ok(())
    }

    pub fn n_instances(&self) -> usize {
        self.clusters.iter().map(|c| c.size).sum()
    }

    /// Two clusters of `per_cluster` instances over six features, where only
    /// `x1` and `x2` separate the clusters. `x1` carries most of the
    /// separation so the two informative features stay below a 0.7 rank
    /// correlation. Technique `A` is good only on cluster `c1`, `B` only on
    /// `c2`, and `C` is never good.
    pub fn two_cluster(per_cluster: usize) -> Self {
        let feature_names: Vec<String> = (1..=6).map(|k| format!("x{k}")).collect();
        let cluster = |name: &str, s: f64| ClusterSpec {
            name: name.into(),
            size: per_cluster,
            mean: vec![3.0 * s, 0.75 * s, 0.0, 0.0, 0.0, 0.0],
            scale: 1.0,
        };
        let tech = |name: &str, c1: f64, c2: f64| TechniqueSpec {
            name: name.into(),
            coverage: vec![c1, c2],
        };
        Self {
            feature_names,
            clusters: vec![cluster("c1", 1.0), cluster("c2", -1.0)],
            techniques: vec![tech("A", 0.95, 0.55), tech("B", 0.55, 0.95), tech("C", 0.7, 0.7)],
            coverage_noise: 0.01,
        }
    }
}

pub const PRESETS: [&str; 1] = ["two-cluster"];

pub fn preset(name: &str) -> Result<SynthSpec> {
    match name {
        "two-cluster" => Ok(SynthSpec::two_cluster(150)),
        _ => Err(Error::Synth(format!(
            "unknown preset `{name}`; available: {}",
            PRESETS.join(", ")
        ))),
    }
}

/// Samples meta-data from `spec`. Instances are numbered in cluster order.
pub fn synth_metadata(spec: &SynthSpec, seed_base: u64) -> Result<Metadata> {
    spec.validate()?;
    let n = spec.n_instances();
    let nf = spec.feature_names.len();
    let nt = spec.techniques.len();
    let width = n.to_string().len();
    let mut ids = Vec::with_capacity(n);
    let mut sources = Vec::with_capacity(n);
    let mut f = DMatrix::zeros(nf, n);
    let mut y = DMatrix::zeros(nt, n);
    let mut col = 0;
    for (ci, c) in spec.clusters.iter().enumerate() {
        let mut rng = seed::rng(seed_base, &[ci as u64]);
        for _ in 0..c.size {
            ids.push(format!("i{:0width$}", col + 1));
            sources.push(c.name.clone());
            for j in 0..nf {
                let e: f64 = StandardNormal.sample(&mut rng);
                f[(j, col)] = c.mean[j] + c.scale * e;
            }
            for (t, tech) in spec.techniques.iter().enumerate() {
                let e: f64 = StandardNormal.sample(&mut rng);
                y[(t, col)] = (tech.coverage[ci] + spec.coverage_noise * e).clamp(0.0, 1.0);
            }
            col += 1;
        }
    }
    Metadata::new(
        ids,
        Some(sources),
        spec.feature_names.clone(),
        spec.techniques.iter().map(|t| t.name.clone()).collect(),
        f,
        y,
    )
}
