//! Feature preprocessing: outlier bounding, Box-Cox normalisation with
//! z-standardisation, and Spearman-based feature filtering.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metadata::Metadata;
use crate::stats;

/// Features are clamped to `median +/- IQR_MULTIPLIER * IQR`.
pub const IQR_MULTIPLIER: f64 = 5.0;
pub const LAMBDA_MIN: f64 = -5.0;
pub const LAMBDA_MAX: f64 = 5.0;
pub const LAMBDA_STEP: f64 = 0.01;
/// Below this magnitude lambda is treated as zero (log transform).
pub const LAMBDA_ZERO: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClampInfo {
    /// `None` when the interquartile range is zero and no clamp was applied.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub iqr_zero: bool,
}

/// Clamps every feature row to `median +/- 5 IQR`. Rows with zero IQR are
/// left untouched and flagged.
pub fn bound_outliers(f: &DMatrix<f64>) -> (DMatrix<f64>, Vec<ClampInfo>) {
    let mut out = f.clone();
    let mut info = Vec::with_capacity(f.nrows());
    for r in 0..f.nrows() {
        let row: Vec<f64> = f.row(r).iter().copied().collect();
        let sorted = stats::sorted_copy(&row);
        let q1 = stats::quantile_sorted(&sorted, 0.25);
        let q3 = stats::quantile_sorted(&sorted, 0.75);
        let med = stats::quantile_sorted(&sorted, 0.5);
        let iqr = q3 - q1;
        if iqr <= 0.0 {
            log::warn!("feature row {r}: interquartile range is zero, not clamped");
            info.push(ClampInfo {
                lo: None,
                hi: None,
                iqr_zero: true,
            });
            continue;
        }
        let lo = med - IQR_MULTIPLIER * iqr;
        let hi = med + IQR_MULTIPLIER * iqr;
        for c in 0..f.ncols() {
            out[(r, c)] = out[(r, c)].clamp(lo, hi);
        }
        info.push(ClampInfo {
            lo: Some(lo),
            hi: Some(hi),
            iqr_zero: false,
        });
    }
    (out, info)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCoxInfo {
    pub lambda: f64,
    /// Added to every value before the transform (zero when already positive).
    pub shift: f64,
    /// Mean and population std of the power term `x^lambda` (or `ln x` when
    /// lambda is zero), used for standardisation.
    pub mean: f64,
    pub std: f64,
    pub constant: bool,
}

/// Box-Cox transform `(x^lambda - 1) / lambda`, or `ln x` at lambda zero.
pub fn boxcox(x: f64, lambda: f64) -> f64 {
    if lambda.abs() < LAMBDA_ZERO {
        x.ln()
    } else {
        (x.powf(lambda) - 1.0) / lambda
    }
}

/// The Box-Cox value up to the affine map `(u - 1) / lambda`. Standardising
/// `u` directly avoids cancellation in `x^lambda - 1` at large |lambda|.
fn power_term(x: f64, lambda: f64) -> f64 {
    if lambda.abs() < LAMBDA_ZERO {
        x.ln()
    } else {
        x.powf(lambda)
    }
}

fn lambda_sign(lambda: f64) -> f64 {
    if lambda < -LAMBDA_ZERO {
        -1.0
    } else {
        1.0
    }
}

fn boxcox_log_likelihood(xs: &[f64], sum_log: f64, lambda: f64) -> f64 {
    let us: Vec<f64> = xs.iter().map(|&x| power_term(x, lambda)).collect();
    let sd_u = stats::std_pop(&us);
    // var(y) = var(u) / lambda^2 for lambda != 0
    let log_var = if lambda.abs() < LAMBDA_ZERO {
        2.0 * sd_u.ln()
    } else {
        2.0 * sd_u.ln() - 2.0 * lambda.abs().ln()
    };
    let n = xs.len() as f64;
    -n / 2.0 * log_var + (lambda - 1.0) * sum_log
}

/// Maximum-likelihood lambda over the grid `[-5, 5]` step 0.01 for strictly
/// positive data. Grid points with a non-finite likelihood are skipped.
pub fn fit_boxcox_lambda(xs: &[f64]) -> f64 {
    let sum_log: f64 = xs.iter().map(|x| x.ln()).sum();
    let steps = ((LAMBDA_MAX - LAMBDA_MIN) / LAMBDA_STEP).round() as i64;
    let mut best = (f64::NEG_INFINITY, 1.0);
    for k in 0..=steps {
        let lambda = (LAMBDA_MIN * 100.0 + k as f64) / 100.0;
        let ll = boxcox_log_likelihood(xs, sum_log, lambda);
        if ll.is_finite() && ll > best.0 {
            best = (ll, lambda);
        }
    }
    best.1
}

/// Box-Cox transform followed by z-standardisation, per feature row.
/// Constant rows are passed through unchanged and flagged.
pub fn boxcox_normalize(f: &DMatrix<f64>, names: &[String]) -> Result<(DMatrix<f64>, Vec<BoxCoxInfo>)> {
    let mut out = f.clone();
    let mut info = Vec::with_capacity(f.nrows());
    for r in 0..f.nrows() {
        let row: Vec<f64> = f.row(r).iter().copied().collect();
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            log::warn!("feature `{}` is constant, passed through", names[r]);
            info.push(BoxCoxInfo {
                lambda: 1.0,
                shift: 0.0,
                mean: 0.0,
                std: 1.0,
                constant: true,
            });
            continue;
        }
        let shift = if min <= 0.0 { 1.0 - min } else { 0.0 };
        let shifted: Vec<f64> = row.iter().map(|x| x + shift).collect();
        let lambda = fit_boxcox_lambda(&shifted);
        let us: Vec<f64> = shifted.iter().map(|&x| power_term(x, lambda)).collect();
        let mean = stats::mean(&us);
        let std = stats::std_pop(&us);
        if !(mean.is_finite() && std.is_finite() && std > 0.0) {
            return Err(Error::Prep {
                feature: names[r].clone(),
                message: format!("non-finite Box-Cox result (lambda {lambda})"),
            });
        }
        let sign = lambda_sign(lambda);
        for (c, u) in us.iter().enumerate() {
            out[(r, c)] = sign * (u - mean) / std;
        }
        info.push(BoxCoxInfo {
            lambda,
            shift,
            mean,
            std,
            constant: false,
        });
    }
    Ok((out, info))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DropReason {
    WeakCorrelation,
    RedundantWith(String),
}

impl DropReason {
    pub fn code(&self) -> String {
        match self {
            DropReason::WeakCorrelation => "weak_correlation".into(),
            DropReason::RedundantWith(other) => format!("redundant_with:{other}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpearmanFilter {
    /// Retained feature indices, ascending.
    pub retained: Vec<usize>,
    /// features x techniques
    pub rho: DMatrix<f64>,
    pub max_abs_rho: Vec<f64>,
    /// `None` for retained features.
    pub reasons: Vec<Option<DropReason>>,
}

/// Keeps features whose largest |rho| against any technique is at least
/// `floor`, then removes near-duplicates (|rho| between features at least
/// `duplicate_rho`), keeping the one more correlated with performance.
pub fn spearman_filter(
    f: &DMatrix<f64>,
    y: &DMatrix<f64>,
    names: &[String],
    floor: f64,
    duplicate_rho: f64,
) -> Result<SpearmanFilter> {
    let n = f.ncols();
    if n < 3 {
        return Err(Error::Prep {
            feature: "*".into(),
            message: format!("rank correlation needs at least 3 instances, got {n}"),
        });
    }
    let rows =
        |m: &DMatrix<f64>| -> Vec<Vec<f64>> { (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect() };
    let fr: Vec<Vec<f64>> = rows(f).iter().map(|r| stats::average_ranks(r)).collect();
    let yr: Vec<Vec<f64>> = rows(y).iter().map(|r| stats::average_ranks(r)).collect();
    let rho = DMatrix::from_fn(f.nrows(), y.nrows(), |a, t| stats::pearson(&fr[a], &yr[t]));
    let max_abs_rho: Vec<f64> = (0..f.nrows())
        .map(|a| rho.row(a).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .collect();

    let mut reasons: Vec<Option<DropReason>> = vec![None; f.nrows()];
    let mut candidates: Vec<usize> = Vec::new();
    for a in 0..f.nrows() {
        if max_abs_rho[a] >= floor {
            candidates.push(a);
        } else {
            reasons[a] = Some(DropReason::WeakCorrelation);
        }
    }
    candidates.sort_by(|&a, &b| {
        max_abs_rho[b]
            .total_cmp(&max_abs_rho[a])
            .then_with(|| names[a].cmp(&names[b]))
    });
    let mut kept: Vec<usize> = Vec::new();
    for a in candidates {
        let clash = kept
            .iter()
            .find(|&&b| stats::pearson(&fr[a], &fr[b]).abs() >= duplicate_rho);
        match clash {
            Some(&b) => reasons[a] = Some(DropReason::RedundantWith(names[b].clone())),
            None => kept.push(a),
        }
    }
    kept.sort_unstable();
    Ok(SpearmanFilter {
        retained: kept,
        rho,
        max_abs_rho,
        reasons,
    })
}

/// Everything learned about one input feature during preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePrep {
    pub name: String,
    pub clamp: ClampInfo,
    pub boxcox: BoxCoxInfo,
    /// Training range after clamping, used to bound out-of-sample values.
    pub min: f64,
    pub max: f64,
    pub retained: bool,
    pub reason: Option<DropReason>,
    pub max_abs_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepReport {
    pub features: Vec<FeaturePrep>,
    pub technique_names: Vec<String>,
    /// features x techniques, row-major
    pub rho: Vec<Vec<f64>>,
}

impl PrepReport {
    pub fn retained_names(&self) -> Vec<String> {
        self.features
            .iter()
            .filter(|f| f.retained)
            .map(|f| f.name.clone())
            .collect()
    }

    /// Applies the stored clamp, shift, Box-Cox and standardisation to a raw
    /// value of feature `name`. Values are first bounded to the training range.
    pub fn transform_value(&self, name: &str, x: f64) -> Result<f64> {
        let fp = self
            .features
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::Prep {
                feature: name.to_string(),
                message: "unknown feature".into(),
            })?;
        let mut v = x;
        if let (Some(lo), Some(hi)) = (fp.clamp.lo, fp.clamp.hi) {
            v = v.clamp(lo, hi);
        }
        v = v.clamp(fp.min, fp.max);
        if fp.boxcox.constant {
            return Ok(v);
        }
        let lambda = fp.boxcox.lambda;
        let u = power_term(v + fp.boxcox.shift, lambda);
        Ok(lambda_sign(lambda) * (u - fp.boxcox.mean) / fp.boxcox.std)
    }

    pub fn to_csv(&self, header_comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = header_comment {
            out.push_str(&format!("# {c}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "feature",
            "lambda",
            "clamp_lo",
            "clamp_hi",
            "retained",
            "reason",
            "max_abs_rho",
        ])
        .expect("in-memory write");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for f in &self.features {
            w.write_record([
                f.name.clone(),
                f.boxcox.lambda.to_string(),
                opt(f.clamp.lo),
                opt(f.clamp.hi),
                f.retained.to_string(),
                f.reason
                    .as_ref()
                    .map(DropReason::code)
                    .unwrap_or_else(|| "retained".into()),
                f.max_abs_rho.to_string(),
            ])
            .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        out
    }
}

/// Result of the full preprocessing chain.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Metadata restricted to the retained, transformed features.
    pub metadata: Metadata,
    pub report: PrepReport,
}

pub fn preprocess(md: &Metadata, spearman_floor: f64, duplicate_rho: f64) -> Result<Prepared> {
    let names = md.feature_names();
    let (bounded, clamps) = bound_outliers(md.features());
    let (transformed, bc) = boxcox_normalize(&bounded, names)?;
    let filt = spearman_filter(&transformed, md.performance(), names, spearman_floor, duplicate_rho)?;
    let features: Vec<FeaturePrep> = (0..names.len())
        .map(|a| {
            let row = bounded.row(a);
            FeaturePrep {
                name: names[a].clone(),
                clamp: clamps[a],
                boxcox: bc[a],
                min: row.min(),
                max: row.max(),
                retained: filt.reasons[a].is_none(),
                reason: filt.reasons[a].clone(),
                max_abs_rho: filt.max_abs_rho[a],
            }
        })
        .collect();
    let report = PrepReport {
        features,
        technique_names: md.technique_names().to_vec(),
        rho: (0..names.len())
            .map(|a| filt.rho.row(a).iter().copied().collect())
            .collect(),
    };
    if filt.retained.is_empty() {
        return Err(Error::Prep {
            feature: "*".into(),
            message: format!("no feature reaches |rho| >= {spearman_floor} against any technique"),
        });
    }
    let kept_names: Vec<String> = filt.retained.iter().map(|&a| names[a].clone()).collect();
    let kept = transformed.select_rows(filt.retained.iter());
    Ok(Prepared {
        metadata: md.with_features(kept_names, kept)?,
        report,
    })
}
