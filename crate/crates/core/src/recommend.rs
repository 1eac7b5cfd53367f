//! Ranks techniques for a new instance by the good footprints containing its
//! projected position.

use crate::error::{Error, Result};
use crate::footprint::Footprint;
use crate::geometry::{self, Pt};
use crate::pilot::{project_point, Projection};
use crate::prep::PrepReport;

#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    pub technique: String,
    pub purity: f64,
    pub alpha_n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub z: Pt,
    pub ranked: Vec<Ranked>,
    /// Set when no footprint contains the point; `ranked` then holds the
    /// technique with the highest overall good rate.
    pub fallback: bool,
}

/// `names`/`values` are a raw feature vector in the original (unprocessed)
/// scale. Every name must be a training feature and every feature used by
/// the projection must be present. `good_rates[j]` belongs to technique `j`
/// of the projection.
pub fn recommend(
    prep: &PrepReport,
    projection: &Projection,
    good_footprints: &[Footprint],
    good_rates: &[f64],
    names: &[String],
    values: &[f64],
    tolerance: f64,
) -> Result<Recommendation> {
    if names.len() != values.len() {
        return Err(Error::Recommend("feature names and values differ in length".into()));
    }
    if let Some(unknown) = names.iter().find(|n| !prep.features.iter().any(|f| &f.name == *n)) {
        return Err(Error::Recommend(format!(
            "feature `{unknown}` was not in the training meta-data; expected names from: {}",
            prep.features
                .iter()
                .map(|f| f.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let x = projection
        .feature_names
        .iter()
        .map(|fname| {
            let k = names.iter().position(|n| n == fname).ok_or_else(|| {
                Error::Recommend(format!("feature `{fname}` is required by the projection but missing"))
            })?;
            prep.transform_value(fname, values[k])
        })
        .collect::<Result<Vec<_>>>()?;
    let (z1, z2) = project_point(projection, &x)?;
    let z = [z1, z2];
    let mut ranked: Vec<(usize, Ranked)> = good_footprints
        .iter()
        .filter(|f| geometry::multipolygon_contains(&f.polygons, z, tolerance))
        .map(|f| {
            (
                f.technique_index,
                Ranked {
                    technique: f.technique.clone(),
                    purity: f.metrics.purity,
                    alpha_n: f.metrics.alpha_n,
                },
            )
        })
        .collect();
    ranked.sort_by(|(ia, a), (ib, b)| {
        b.purity
            .total_cmp(&a.purity)
            .then(b.alpha_n.total_cmp(&a.alpha_n))
            .then(ia.cmp(ib))
    });
    if !ranked.is_empty() {
        return Ok(Recommendation {
            z,
            ranked: ranked.into_iter().map(|(_, r)| r).collect(),
            fallback: false,
        });
    }
    let best = (0..good_rates.len())
        .max_by(|&a, &b| good_rates[a].total_cmp(&good_rates[b]).then(b.cmp(&a)))
        .ok_or_else(|| Error::Recommend("no techniques".into()))?;
    Ok(Recommendation {
        z,
        ranked: vec![Ranked {
            technique: projection.technique_names[best].clone(),
            purity: 0.0,
            alpha_n: 0.0,
        }],
        fallback: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::footprint::{FootprintKind, FootprintMetrics};
    use crate::prep::{BoxCoxInfo, ClampInfo, FeaturePrep};
    use geo::MultiPolygon;
    use nalgebra::DMatrix;

    fn feature(name: &str) -> FeaturePrep {
        FeaturePrep {
            name: name.into(),
            clamp: ClampInfo {
                lo: None,
                hi: None,
                iqr_zero: false,
            },
            boxcox: BoxCoxInfo {
                lambda: 1.0,
                shift: 0.0,
                mean: 0.0,
                std: 1.0,
                constant: false,
            },
            min: -100.0,
            max: 100.0,
            retained: true,
            reason: None,
            max_abs_rho: 0.5,
        }
    }

    fn setup() -> (PrepReport, Projection) {
        let prep = PrepReport {
            features: vec![feature("a"), feature("b"), feature("c")],
            technique_names: vec!["T0".into(), "T1".into(), "T2".into()],
            rho: vec![vec![0.5; 3]; 3],
        };
        let proj = Projection {
            feature_names: vec!["a".into(), "b".into()],
            technique_names: prep.technique_names.clone(),
            a: DMatrix::identity(2, 2),
            b: DMatrix::identity(2, 2),
            c: DMatrix::zeros(3, 2),
            objective: 0.0,
            topo_preservation: 1.0,
            restart_id: 0,
            seed: 0,
        };
        (prep, proj)
    }

    fn square_fp(name: &str, idx: usize, x0: f64, purity: f64) -> Footprint {
        Footprint {
            technique: name.into(),
            technique_index: idx,
            kind: FootprintKind::Good,
            polygons: MultiPolygon::new(vec![geometry::polygon_from_ring(&[
                [x0, 0.0],
                [x0 + 2.0, 0.0],
                [x0 + 2.0, 2.0],
                [x0, 2.0],
            ])]),
            metrics: FootprintMetrics {
                purity,
                alpha_n: 10.0,
                ..Default::default()
            },
        }
    }

    #[test]
    fn ranking_and_fallback() {
        let (prep, proj) = setup();
        let fps = vec![
            square_fp("T0", 0, 0.0, 0.8),
            square_fp("T1", 1, 1.0, 0.9),
            square_fp("T2", 2, 5.0, 1.0),
        ];
        let names = vec!["a".to_string(), "b".to_string()];
        let rates = [0.2, 0.5, 0.4];
        // x raw value = 1 + 1 (shift 0, lambda 1: u = x, z = (u - 0)/1)
        let r = recommend(&prep, &proj, &fps, &rates, &names, &[1.5, 1.0], 1e-9).unwrap();
        assert!(!r.fallback);
        let order: Vec<&str> = r.ranked.iter().map(|x| x.technique.as_str()).collect();
        assert_eq!(order, ["T1", "T0"]);
        let only = recommend(&prep, &proj, &fps, &rates, &names, &[0.5, 1.0], 1e-9).unwrap();
        assert_eq!(only.ranked[0].technique, "T0");
        let none = recommend(&prep, &proj, &fps, &rates, &names, &[-50.0, 1.0], 1e-9).unwrap();
        assert!(none.fallback);
        assert_eq!(none.ranked[0].technique, "T1");
    }

    #[test]
    fn unknown_or_missing_features_are_errors() {
        let (prep, proj) = setup();
        let e = recommend(
            &prep,
            &proj,
            &[],
            &[0.1; 3],
            &["a".into(), "zz".into()],
            &[0.0, 0.0],
            0.0,
        )
        .unwrap_err();
        assert!(e.to_string().contains("zz"));
        assert!(recommend(&prep, &proj, &[], &[0.1; 3], &["a".into()], &[0.0], 0.0).is_err());
    }
}
