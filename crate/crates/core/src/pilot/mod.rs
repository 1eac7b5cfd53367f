//! Linear 2D projection fitted so that features and performance are both
//! approximately linear in the instance coordinates.
//!
//! With `Z = A F`, the fit minimises
//! `||F - B Z||_F^2 + ||Y - C Z||_F^2` over `A` (2 x n), `B` (n x 2) and
//! `C` (t x 2). The problem has infinitely many optima, so several random
//! restarts are solved and the one whose 2D distances best correlate with
//! the feature-space distances is kept.

pub mod bfgs;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::stats;

pub use bfgs::{BfgsConfig, Termination};

/// Above this many instances the distance correlation uses a seeded subsample.
pub const TOPO_SUBSAMPLE: usize = 5000;

#[derive(Debug, Clone, Copy)]
pub struct PilotConfig {
    pub restarts: usize,
    pub seed: u64,
    pub bfgs: BfgsConfig,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            restarts: 30,
            seed: 0,
            bfgs: BfgsConfig::default(),
        }
    }
}

/// Packs `A`, `B`, `C` into one parameter vector (column-major blocks).
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub n: usize,
    pub t: usize,
}

impl Layout {
    pub fn len(&self) -> usize {
        2 * self.n + 2 * self.n + 2 * self.t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unpack(&self, theta: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let (n, t) = (self.n, self.t);
        let a = DMatrix::from_column_slice(2, n, &theta.as_slice()[..2 * n]);
        let b = DMatrix::from_column_slice(n, 2, &theta.as_slice()[2 * n..4 * n]);
        let c = DMatrix::from_column_slice(t, 2, &theta.as_slice()[4 * n..4 * n + 2 * t]);
        (a, b, c)
    }

    pub fn pack(&self, a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> DVector<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(a.as_slice());
        v.extend_from_slice(b.as_slice());
        v.extend_from_slice(c.as_slice());
        DVector::from_vec(v)
    }
}

pub fn objective(f: &DMatrix<f64>, y: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> f64 {
    let z = a * f;
    (f - b * &z).norm_squared() + (y - c * &z).norm_squared()
}

/// Objective and analytic gradient at `theta`.
pub fn objective_and_gradient(
    f: &DMatrix<f64>,
    y: &DMatrix<f64>,
    layout: Layout,
    theta: &DVector<f64>,
) -> (f64, DVector<f64>) {
    let (a, b, c) = layout.unpack(theta);
    let z = &a * f;
    let rf = f - &b * &z;
    let ry = y - &c * &z;
    let value = rf.norm_squared() + ry.norm_squared();
    let zt = z.transpose();
    let gb = &rf * &zt * -2.0;
    let gc = &ry * &zt * -2.0;
    let ga = (b.transpose() * &rf + c.transpose() * &ry) * f.transpose() * -2.0;
    (value, layout.pack(&ga, &gb, &gc))
}

fn condensed_distances(x: &DMatrix<f64>, cols: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(cols.len() * cols.len().saturating_sub(1) / 2);
    for (k, &i) in cols.iter().enumerate() {
        for &j in &cols[k + 1..] {
            out.push((x.column(i) - x.column(j)).norm());
        }
    }
    out
}

/// Pearson correlation between pairwise distances among the columns of `high`
/// and among the columns of `low`.
pub fn topological_preservation(high: &DMatrix<f64>, low: &DMatrix<f64>, seed_base: u64) -> f64 {
    let n = high.ncols();
    let cols: Vec<usize> = if n > TOPO_SUBSAMPLE {
        let mut rng = seed::rng(seed_base, &[0x7090]);
        let mut v = sample(&mut rng, n, TOPO_SUBSAMPLE).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..n).collect()
    };
    stats::pearson(&condensed_distances(high, &cols), &condensed_distances(low, &cols))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub feature_names: Vec<String>,
    pub technique_names: Vec<String>,
    #[serde(with = "matrix_rows")]
    pub a: DMatrix<f64>,
    #[serde(with = "matrix_rows")]
    pub b: DMatrix<f64>,
    #[serde(with = "matrix_rows")]
    pub c: DMatrix<f64>,
    pub objective: f64,
    pub topo_preservation: f64,
    pub restart_id: usize,
    pub seed: u64,
}

mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect();
        serde::Serialize::serialize(&rows, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(nr, nc, |r, c| rows[r][c]))
    }
}

impl Projection {
    /// Builds a projection from given matrices, evaluating its objective and
    /// topological preservation on `f`, `y`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_matrices(
        feature_names: Vec<String>,
        technique_names: Vec<String>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        f: &DMatrix<f64>,
        y: &DMatrix<f64>,
        restart_id: usize,
        seed: u64,
    ) -> Self {
        let z = &a * f;
        Self {
            objective: objective(f, y, &a, &b, &c),
            topo_preservation: topological_preservation(f, &z, seed),
            feature_names,
            technique_names,
            a,
            b,
            c,
            restart_id,
            seed,
        }
    }

    /// Instance coordinates `Z = A F` (2 x instances).
    pub fn coordinates(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        &self.a * f
    }

    pub fn n_features(&self) -> usize {
        self.a.ncols()
    }

    pub fn to_json(&self, fingerprint: &str) -> String {
        let mut v = serde_json::to_value(self).expect("serialisable");
        v["fingerprint"] = serde_json::Value::String(fingerprint.to_string());
        serde_json::to_string_pretty(&v).expect("serialisable") + "\n"
    }

    /// Parses a projection document, checking matrix shapes agree with the
    /// name lists.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Projection = serde_json::from_str(text)?;
        let n = p.feature_names.len();
        let t = p.technique_names.len();
        if p.a.shape() != (2, n) || p.b.shape() != (n, 2) || p.c.shape() != (t, 2) {
            return Err(Error::Projection(format!(
                "matrix shapes A {:?}, B {:?}, C {:?} do not match {n} features and {t} techniques",
                p.a.shape(),
                p.b.shape(),
                p.c.shape()
            )));
        }
        Ok(p)
    }
}

/// `A x` for a preprocessed feature vector.
pub fn project_point(p: &Projection, x: &[f64]) -> Result<(f64, f64)> {
    if x.len() != p.n_features() {
        return Err(Error::Projection(format!(
            "point has {} features, projection expects {}",
            x.len(),
            p.n_features()
        )));
    }
    let z = &p.a * DVector::from_column_slice(x);
    Ok((z[0], z[1]))
}

#[derive(Debug, Clone)]
pub struct RestartSummary {
    pub restart_id: usize,
    pub objective: f64,
    pub topo_preservation: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PilotFit {
    pub projection: Projection,
    /// Completed restarts, in restart order. Discarded restarts are absent.
    pub restarts: Vec<RestartSummary>,
}

fn solve_restart(
    f: &DMatrix<f64>,
    y: &DMatrix<f64>,
    layout: Layout,
    cfg: &PilotConfig,
    r: usize,
) -> (bfgs::BfgsResult, u64) {
    let rseed = seed::derive(cfg.seed, &[r as u64]);
    let mut rng = seed::rng(rseed, &[]);
    let x0 = DVector::from_iterator(layout.len(), (0..layout.len()).map(|_| StandardNormal.sample(&mut rng)));
    let mut eval = |theta: &DVector<f64>| objective_and_gradient(f, y, layout, theta);
    (bfgs::minimize(&mut eval, x0, &cfg.bfgs), rseed)
}

/// Fits the projection with `cfg.restarts` seeded restarts solved in
/// parallel. The winner maximises topological preservation; ties go to the
/// lower objective, then the lower restart id.
pub fn fit_projection(
    f: &DMatrix<f64>,
    y: &DMatrix<f64>,
    feature_names: &[String],
    technique_names: &[String],
    cfg: &PilotConfig,
) -> Result<PilotFit> {
    let (n, i) = f.shape();
    if n < 2 {
        return Err(Error::Projection(format!("need at least 2 features, got {n}")));
    }
    if i < 3 {
        return Err(Error::Projection(format!(
            "need at least 3 instances for distance correlation, got {i}"
        )));
    }
    if y.ncols() != i {
        return Err(Error::Projection(
            "feature and performance instance counts differ".into(),
        ));
    }
    if cfg.restarts == 0 {
        return Err(Error::Projection("restarts must be at least 1".into()));
    }
    let layout = Layout { n, t: y.nrows() };
    let solved: Vec<Option<(Projection, RestartSummary)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let (res, rseed) = solve_restart(f, y, layout, cfg, r);
            if !res.value.is_finite() || res.termination == Termination::NonFinite {
                log::warn!("restart {r}: non-finite objective, discarded");
                return None;
            }
            let (a, b, c) = layout.unpack(&res.x);
            let p = Projection::from_matrices(
                feature_names.to_vec(),
                technique_names.to_vec(),
                a,
                b,
                c,
                f,
                y,
                r,
                rseed,
            );
            if !p.objective.is_finite() {
                log::warn!("restart {r}: non-finite objective, discarded");
                return None;
            }
            let summary = RestartSummary {
                restart_id: r,
                objective: p.objective,
                topo_preservation: p.topo_preservation,
                iterations: res.iterations,
                termination: res.termination,
                history: res.history,
            };
            Some((p, summary))
        })
        .collect();
    let done: Vec<(Projection, RestartSummary)> = solved.into_iter().flatten().collect();
    let best = done
        .iter()
        .enumerate()
        .max_by(|(_, (a, _)), (_, (b, _))| {
            a.topo_preservation
                .total_cmp(&b.topo_preservation)
                .then(b.objective.total_cmp(&a.objective))
                .then(b.restart_id.cmp(&a.restart_id))
        })
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Projection("every restart produced a non-finite objective".into()))?;
    let projection = done[best].0.clone();
    Ok(PilotFit {
        projection,
        restarts: done.into_iter().map(|(_, s)| s).collect(),
    })
}
