//! Feature-subset selection: cluster similar features with k-means, build
//! every one-feature-per-cluster combination, and keep the combination whose
//! 2D PCA projection best predicts each technique's good/bad labels under
//! random-forest cross-validation.

pub mod forest;
pub mod kmeans;
pub mod pca;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metadata::{GoodnessMatrix, Metadata};
use crate::seed;

pub use forest::ForestConfig;

pub const SILHOUETTE_K_MIN: usize = 3;
pub const SILHOUETTE_K_MAX: usize = 12;

#[derive(Debug, Clone)]
pub struct FeatselConfig {
    /// Fixed cluster count; chosen by silhouette when `None`.
    pub k: Option<usize>,
    pub kmeans_restarts: usize,
    pub candidate_cap: usize,
    pub forest: ForestConfig,
    pub seed: u64,
}

impl Default for FeatselConfig {
    fn default() -> Self {
        Self {
            k: None,
            kmeans_restarts: 100,
            candidate_cap: 1000,
            forest: ForestConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureClusterSet {
    pub k: usize,
    /// Cluster id per feature row.
    pub assignment: Vec<usize>,
    pub silhouette: f64,
}

impl FeatureClusterSet {
    /// Feature indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (f, &c) in self.assignment.iter().enumerate() {
            out[c].push(f);
        }
        out
    }
}

fn rows_of(f: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..f.nrows()).map(|r| f.row(r).iter().copied().collect()).collect()
}

/// Clusters feature rows (features as points across instances).
pub fn cluster_features(
    f_std: &DMatrix<f64>,
    k: Option<usize>,
    restarts: usize,
    seed_base: u64,
) -> Result<FeatureClusterSet> {
    let nf = f_std.nrows();
    if nf < 2 {
        return Err(Error::FeatureSelection(format!(
            "clustering needs at least 2 features, got {nf}"
        )));
    }
    let points = rows_of(f_std);
    let fit_k = |k: usize| {
        let fit = kmeans::kmeans(&points, k, restarts, seed_base);
        let s = kmeans::silhouette(&points, &fit.assignment);
        FeatureClusterSet {
            k,
            assignment: fit.assignment,
            silhouette: s,
        }
    };
    match k {
        Some(k) if k > nf => Err(Error::FeatureSelection(format!(
            "k = {k} exceeds the feature count {nf}"
        ))),
        Some(k) if k < 2 => Err(Error::FeatureSelection(format!("k = {k} must be at least 2"))),
        Some(k) => Ok(fit_k(k)),
        None => {
            let hi = SILHOUETTE_K_MAX.min(nf - 1);
            if hi < SILHOUETTE_K_MIN {
                // too few features to compare cluster counts: one per cluster
                return Ok(fit_k(nf));
            }
            let mut best: Option<FeatureClusterSet> = None;
            for k in SILHOUETTE_K_MIN..=hi {
                let c = fit_k(k);
                log::debug!("k = {k}: silhouette {:.4}", c.silhouette);
                if best.as_ref().is_none_or(|b| c.silhouette > b.silhouette) {
                    best = Some(c);
                }
            }
            Ok(best.unwrap())
        }
    }
}

/// One-feature-per-cluster combinations. When the full product exceeds
/// `cap`, a seeded uniform sample of `cap` distinct combinations is returned.
/// Output is in mixed-radix order (last cluster varies fastest).
pub fn enumerate_candidates(clusters: &[Vec<usize>], cap: usize, seed_base: u64) -> Result<Vec<Vec<usize>>> {
    if cap == 0 {
        return Err(Error::FeatureSelection("candidate cap must be at least 1".into()));
    }
    if clusters.iter().any(Vec::is_empty) {
        return Err(Error::FeatureSelection("empty feature cluster".into()));
    }
    let total = clusters
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    if total <= cap as u128 {
        let mut out = vec![Vec::new()];
        for c in clusters {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    c.iter().map(move |&f| {
                        let mut p = prefix.clone();
                        p.push(f);
                        p
                    })
                })
                .collect();
        }
        return Ok(out);
    }
    let mut rng = seed::rng(seed_base, &[0xCA9]);
    let mut picked: BTreeSet<Vec<usize>> = BTreeSet::new();
    while picked.len() < cap {
        let combo: Vec<usize> = clusters.iter().map(|c| rng.random_range(0..c.len())).collect();
        picked.insert(combo);
    }
    Ok(picked
        .into_iter()
        .map(|pos| pos.iter().zip(clusters).map(|(&p, c)| c[p]).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    /// Feature row indices.
    pub features: Vec<usize>,
    /// CV error per technique; `None` when its labels are single-class.
    pub per_technique: Vec<Option<f64>>,
    pub mean_error: f64,
}

/// Instances sorted by id, then shuffled with the seed. Folds and training
/// order follow this, so scores do not depend on file order.
pub fn canonical_order(ids: &[String], seed_base: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    order.shuffle(&mut seed::rng(seed_base, &[0x0D0]));
    order
}

pub fn score_candidate(
    subset: &[usize],
    f_std: &DMatrix<f64>,
    good: &GoodnessMatrix,
    order: &[usize],
    forest: &ForestConfig,
    seed_base: u64,
) -> Result<CandidateScore> {
    if subset.len() < 2 {
        return Err(Error::FeatureSelection(format!(
            "candidate needs at least 2 features, got {}",
            subset.len()
        )));
    }
    let sub = f_std.select_rows(subset.iter());
    let z = pca::pca_2d(&sub);
    let x: Vec<Vec<f64>> = (0..z.ncols()).map(|c| vec![z[(0, c)], z[(1, c)]]).collect();
    let mut per = Vec::with_capacity(good.good.nrows());
    for t in 0..good.good.nrows() {
        let y = good.good_row(t);
        let pos = y.iter().filter(|&&b| b).count();
        if pos == 0 || pos == y.len() {
            log::info!("technique {t}: single-class labels, excluded from the mean");
            per.push(None);
            continue;
        }
        per.push(Some(forest::cv_error(
            &x,
            &y,
            order,
            forest,
            seed::derive(seed_base, &[t as u64]),
        )));
    }
    let scored: Vec<f64> = per.iter().flatten().copied().collect();
    let mean_error = if scored.is_empty() {
        0.0
    } else {
        scored.iter().sum::<f64>() / scored.len() as f64
    };
    Ok(CandidateScore {
        features: subset.to_vec(),
        per_technique: per,
        mean_error,
    })
}

/// Index of the lowest mean error; the earliest candidate wins ties.
pub fn select_features(scores: &[CandidateScore]) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::FeatureSelection("no candidates to select from".into()));
    }
    let mut best = 0;
    for (k, s) in scores.iter().enumerate().skip(1) {
        if s.mean_error < scores[best].mean_error {
            best = k;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub clusters: FeatureClusterSet,
    pub candidates: Vec<CandidateScore>,
    pub selected: usize,
}

impl Selection {
    pub fn selected_features(&self) -> &[usize] {
        &self.candidates[self.selected].features
    }

    pub fn to_csv(&self, feature_names: &[String], technique_names: &[String], header_comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = header_comment {
            out.push_str(&format!("# {c}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["candidate".to_string(), "features".to_string()];
        header.extend(technique_names.iter().map(|t| format!("error_{t}")));
        header.push("mean_error".into());
        header.push("selected".into());
        w.write_record(&header).expect("in-memory write");
        for (k, c) in self.candidates.iter().enumerate() {
            let mut rec = vec![
                k.to_string(),
                c.features
                    .iter()
                    .map(|&f| feature_names[f].as_str())
                    .collect::<Vec<_>>()
                    .join(";"),
            ];
            rec.extend(
                c.per_technique
                    .iter()
                    .map(|e| e.map(|v| v.to_string()).unwrap_or_default()),
            );
            rec.push(c.mean_error.to_string());
            rec.push((k == self.selected).to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        out
    }
}

/// Full selection over preprocessed meta-data (features already filtered
/// and standardised).
pub fn run_selection(md: &Metadata, good: &GoodnessMatrix, cfg: &FeatselConfig) -> Result<Selection> {
    let f = md.features();
    let clusters = cluster_features(f, cfg.k, cfg.kmeans_restarts, seed::derive(cfg.seed, &[1]))?;
    let candidates = enumerate_candidates(&clusters.members(), cfg.candidate_cap, seed::derive(cfg.seed, &[2]))?;
    let order = canonical_order(md.instance_ids(), cfg.seed);
    let scores: Vec<CandidateScore> = candidates
        .par_iter()
        .enumerate()
        .map(|(k, subset)| {
            score_candidate(
                subset,
                f,
                good,
                &order,
                &cfg.forest,
                seed::derive(cfg.seed, &[3, k as u64]),
            )
        })
        .collect::<Result<_>>()?;
    let selected = select_features(&scores)?;
    Ok(Selection {
        clusters,
        candidates: scores,
        selected,
    })
}
