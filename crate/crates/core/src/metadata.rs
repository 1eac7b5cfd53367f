//! Meta-data model: instances, their feature values and the coverage each
//! technique achieved, plus the good/best labelling derived from coverage.
//!
//! The on-disk format is a comma-separated file with a first `instance`
//! column, an optional `source` column, `feature_<name>` columns and
//! `algo_<name>` columns. Lines starting with `#` are comments.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const FEATURE_PREFIX: &str = "feature_";
pub const TECHNIQUE_PREFIX: &str = "algo_";

/// Tolerance used to decide that two coverages tie for best.
pub const BEST_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    instance_ids: Vec<String>,
    sources: Option<Vec<String>>,
    feature_names: Vec<String>,
    technique_names: Vec<String>,
    /// features x instances
    features: DMatrix<f64>,
    /// techniques x instances, coverage in [0, 1]
    performance: DMatrix<f64>,
}

fn check_unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::Metadata(format!("duplicate {what} `{n}`")));
        }
    }
    Ok(())
}

impl Metadata {
    pub fn new(
        instance_ids: Vec<String>,
        sources: Option<Vec<String>>,
        feature_names: Vec<String>,
        technique_names: Vec<String>,
        features: DMatrix<f64>,
        performance: DMatrix<f64>,
    ) -> Result<Self> {
        let n = instance_ids.len();
        if feature_names.is_empty() {
            return Err(Error::Metadata("no feature columns".into()));
        }
        if technique_names.is_empty() {
            return Err(Error::Metadata("no technique columns".into()));
        }
        if features.shape() != (feature_names.len(), n) {
            return Err(Error::Metadata(format!(
                "feature matrix is {:?}, expected ({}, {n})",
                features.shape(),
                feature_names.len()
            )));
        }
        if performance.shape() != (technique_names.len(), n) {
            return Err(Error::Metadata(format!(
                "performance matrix is {:?}, expected ({}, {n})",
                performance.shape(),
                technique_names.len()
            )));
        }
        if let Some(s) = &sources {
            if s.len() != n {
                return Err(Error::Metadata("source label count differs from instance count".into()));
            }
        }
        check_unique(&instance_ids, "instance id")?;
        check_unique(&feature_names, "feature name")?;
        check_unique(&technique_names, "technique name")?;
        for (r, row) in features.row_iter().enumerate() {
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Metadata(format!(
                    "feature `{}` is not finite for instance `{}`",
                    feature_names[r], instance_ids[c]
                )));
            }
        }
        for (r, row) in performance.row_iter().enumerate() {
            if let Some(c) = row.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Metadata(format!(
                    "coverage of `{}` on `{}` is {} (outside [0, 1])",
                    technique_names[r],
                    instance_ids[c],
                    performance[(r, c)]
                )));
            }
        }
        Ok(Self {
            instance_ids,
            sources,
            feature_names,
            technique_names,
            features,
            performance,
        })
    }

    pub fn instance_ids(&self) -> &[String] {
        &self.instance_ids
    }

    pub fn sources(&self) -> Option<&[String]> {
        self.sources.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn technique_names(&self) -> &[String] {
        &self.technique_names
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn performance(&self) -> &DMatrix<f64> {
        &self.performance
    }

    pub fn n_instances(&self) -> usize {
        self.instance_ids.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn technique_index(&self, name: &str) -> Option<usize> {
        self.technique_names.iter().position(|n| n == name)
    }

    /// Same instances and performance with a replaced feature block.
    pub fn with_features(&self, names: Vec<String>, features: DMatrix<f64>) -> Result<Self> {
        Self::new(
            self.instance_ids.clone(),
            self.sources.clone(),
            names,
            self.technique_names.clone(),
            features,
            self.performance.clone(),
        )
    }

    /// Appends extra feature rows keyed by instance id. Every instance must be
    /// present in `rows`.
    pub fn join_features(&self, names: &[String], rows: &HashMap<String, Vec<f64>>) -> Result<Self> {
        let f0 = self.feature_names.len();
        let mut all_names = self.feature_names.clone();
        all_names.extend(names.iter().cloned());
        let mut m = DMatrix::zeros(all_names.len(), self.n_instances());
        m.rows_mut(0, f0).copy_from(&self.features);
        for (c, id) in self.instance_ids.iter().enumerate() {
            let row = rows
                .get(id)
                .ok_or_else(|| Error::Metadata(format!("no joined features for instance `{id}`")))?;
            if row.len() != names.len() {
                return Err(Error::Metadata(format!(
                    "joined feature row for `{id}` has wrong length"
                )));
            }
            for (k, v) in row.iter().enumerate() {
                m[(f0 + k, c)] = *v;
            }
        }
        self.with_features(all_names, m)
    }

    /// Reorders instances: column `j` of the result is column `order[j]` here.
    pub fn permute_instances(&self, order: &[usize]) -> Result<Self> {
        let pick = |m: &DMatrix<f64>| DMatrix::from_fn(m.nrows(), order.len(), |r, c| m[(r, order[c])]);
        Self::new(
            order.iter().map(|&j| self.instance_ids[j].clone()).collect(),
            self.sources
                .as_ref()
                .map(|s| order.iter().map(|&j| s[j].clone()).collect()),
            self.feature_names.clone(),
            self.technique_names.clone(),
            pick(&self.features),
            pick(&self.performance),
        )
    }
}

/// Parses metadata from CSV text.
pub fn parse_metadata(text: &str) -> Result<Metadata> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("instance") {
        return Err(Error::Metadata("first column must be `instance`".into()));
    }
    let mut source_col = None;
    let mut feat_cols = Vec::new();
    let mut tech_cols = Vec::new();
    for (k, h) in headers.iter().enumerate().skip(1) {
        if h == "source" && source_col.is_none() {
            source_col = Some(k);
        } else if let Some(name) = h.strip_prefix(FEATURE_PREFIX).filter(|s| !s.is_empty()) {
            feat_cols.push((k, name.to_string()));
        } else if let Some(name) = h.strip_prefix(TECHNIQUE_PREFIX).filter(|s| !s.is_empty()) {
            tech_cols.push((k, name.to_string()));
        } else {
            return Err(Error::Metadata(format!("unrecognised column `{h}`")));
        }
    }
    if feat_cols.is_empty() {
        return Err(Error::Metadata("no `feature_` columns".into()));
    }
    if tech_cols.is_empty() {
        return Err(Error::Metadata("no `algo_` columns".into()));
    }

    let mut ids = Vec::new();
    let mut sources = Vec::new();
    let mut fvals: Vec<f64> = Vec::new();
    let mut yvals: Vec<f64> = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let id = rec.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::MetadataCell {
                row,
                column: "instance".into(),
                message: "missing instance id".into(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(Error::MetadataCell {
                row,
                column: "instance".into(),
                message: format!("duplicate instance id `{id}`"),
            });
        }
        if let Some(k) = source_col {
            sources.push(rec.get(k).unwrap_or("").to_string());
        }
        for (k, name) in &feat_cols {
            let v = parse_cell(rec.get(*k), row, &headers[*k])?;
            if !v.is_finite() {
                return Err(Error::MetadataCell {
                    row,
                    column: headers[*k].to_string(),
                    message: format!("feature `{name}` is not finite"),
                });
            }
            fvals.push(v);
        }
        for (k, _) in &tech_cols {
            let v = parse_cell(rec.get(*k), row, &headers[*k])?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::MetadataCell {
                    row,
                    column: headers[*k].to_string(),
                    message: format!("coverage {v} outside [0, 1]"),
                });
            }
            yvals.push(v);
        }
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(Error::Metadata("no instance rows".into()));
    }
    let n = ids.len();
    // values were pushed row-major per instance: instance-major = column-major for f x n
    let features = DMatrix::from_column_slice(feat_cols.len(), n, &fvals);
    let performance = DMatrix::from_column_slice(tech_cols.len(), n, &yvals);
    Metadata::new(
        ids,
        source_col.map(|_| sources),
        feat_cols.into_iter().map(|(_, n)| n).collect(),
        tech_cols.into_iter().map(|(_, n)| n).collect(),
        features,
        performance,
    )
}

fn parse_cell(cell: Option<&str>, row: usize, column: &str) -> Result<f64> {
    let s = cell.unwrap_or("");
    if s.is_empty() {
        return Err(Error::MetadataCell {
            row,
            column: column.to_string(),
            message: "missing value".into(),
        });
    }
    s.parse::<f64>().map_err(|_| Error::MetadataCell {
        row,
        column: column.to_string(),
        message: format!("cannot parse `{s}` as a number"),
    })
}

pub fn load_metadata(path: &Path) -> Result<Metadata> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metadata(&text)
}

/// Rows of `instance,feature_<name>,...` CSV (other columns are ignored),
/// as used for joined feature blocks and new instances to classify.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl FeatureTable {
    pub fn as_map(&self) -> HashMap<String, Vec<f64>> {
        self.rows.iter().cloned().collect()
    }
}

pub fn parse_feature_table(text: &str) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("instance") {
        return Err(Error::Metadata("first column must be `instance`".into()));
    }
    let cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter_map(|(k, h)| {
            h.strip_prefix(FEATURE_PREFIX)
                .filter(|s| !s.is_empty())
                .map(|n| (k, n.to_string()))
        })
        .collect();
    if cols.is_empty() {
        return Err(Error::Metadata("no `feature_` columns".into()));
    }
    let feature_names: Vec<String> = cols.iter().map(|(_, n)| n.clone()).collect();
    check_unique(&feature_names, "feature name")?;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(r + 2, |p| p.line() as usize);
        let id = rec[0].to_string();
        if id.is_empty() || !seen.insert(id.clone()) {
            return Err(Error::MetadataCell {
                row: line,
                column: "instance".into(),
                message: format!("empty or duplicate instance id `{id}`"),
            });
        }
        let vals = cols
            .iter()
            .map(|(k, n)| {
                rec[*k]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::MetadataCell {
                        row: line,
                        column: format!("{FEATURE_PREFIX}{n}"),
                        message: format!("`{}` is not a finite number", &rec[*k]),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((id, vals));
    }
    Ok(FeatureTable { feature_names, rows })
}

/// Serialises metadata to CSV. When `header_comment` is given it is written
/// as a leading `# ...` line.
pub fn write_metadata_csv(md: &Metadata, header_comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = header_comment {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["instance".to_string()];
    if md.sources.is_some() {
        header.push("source".into());
    }
    header.extend(md.feature_names.iter().map(|n| format!("{FEATURE_PREFIX}{n}")));
    header.extend(md.technique_names.iter().map(|n| format!("{TECHNIQUE_PREFIX}{n}")));
    w.write_record(&header).expect("in-memory write");
    for (c, id) in md.instance_ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        if let Some(s) = &md.sources {
            rec.push(s[c].clone());
        }
        rec.extend(md.features.column(c).iter().map(|v| v.to_string()));
        rec.extend(md.performance.column(c).iter().map(|v| v.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
    out
}

/// How the goodness tolerance is measured against the best coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GoodnessRule {
    /// `best - cov <= eps` on the coverage scale.
    #[default]
    Absolute,
    /// `best - cov <= eps * best`.
    Relative,
}

impl std::str::FromStr for GoodnessRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(Self::Absolute),
            "relative" => Ok(Self::Relative),
            _ => Err(Error::Config(format!(
                "unknown goodness rule `{s}` (absolute|relative)"
            ))),
        }
    }
}

impl std::fmt::Display for GoodnessRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Absolute => "absolute",
            Self::Relative => "relative",
        })
    }
}

/// Binary good/best labels per (technique, instance).
#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessMatrix {
    pub good: DMatrix<bool>,
    pub best: DMatrix<bool>,
    pub epsilon_good: f64,
    pub rule: GoodnessRule,
}

impl GoodnessMatrix {
    pub fn good_row(&self, t: usize) -> Vec<bool> {
        self.good.row(t).iter().copied().collect()
    }

    pub fn best_row(&self, t: usize) -> Vec<bool> {
        self.best.row(t).iter().copied().collect()
    }

    /// Fraction of instances on which technique `t` is good.
    pub fn good_rate(&self, t: usize) -> f64 {
        let row = self.good.row(t);
        row.iter().filter(|&&b| b).count() as f64 / row.len().max(1) as f64
    }
}

pub fn compute_goodness(md: &Metadata, epsilon_good: f64) -> Result<GoodnessMatrix> {
    compute_goodness_with(md, epsilon_good, GoodnessRule::Absolute)
}

pub fn compute_goodness_with(md: &Metadata, epsilon_good: f64, rule: GoodnessRule) -> Result<GoodnessMatrix> {
    if epsilon_good.is_nan() || epsilon_good < 0.0 {
        return Err(Error::Config(format!("epsilon_good must be >= 0, got {epsilon_good}")));
    }
    let y = md.performance();
    let (t, n) = y.shape();
    let mut good = DMatrix::from_element(t, n, false);
    let mut best = DMatrix::from_element(t, n, false);
    for i in 0..n {
        let col = y.column(i);
        let m = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = match rule {
            GoodnessRule::Absolute => epsilon_good,
            GoodnessRule::Relative => epsilon_good * m,
        };
        for k in 0..t {
            let gap = m - col[k];
            best[(k, i)] = gap <= BEST_TIE_TOLERANCE;
            good[(k, i)] = gap <= tol || best[(k, i)];
        }
    }
    Ok(GoodnessMatrix {
        good,
        best,
        epsilon_good,
        rule,
    })
}
