//! Theoretical boundary of the instance space: the corners of the feature
//! bounding box, minus corners combining strongly correlated features at
//! opposite extremes, projected to 2D and wrapped in a convex hull.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{self, Pt};

/// Largest feature count for which all 2^n corners are enumerated.
pub const MAX_BOUNDARY_FEATURES: usize = 20;
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBounds {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// Features whose upper and lower bounds coincide.
    pub degenerate: Vec<bool>,
}

impl FeatureBounds {
    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// Corner coordinates for a vertex mask: bit `j` set selects the upper
    /// bound of feature `j`.
    pub fn corner(&self, mask: u32) -> Vec<f64> {
        (0..self.len())
            .map(|j| {
                if mask >> j & 1 == 1 {
                    self.upper[j]
                } else {
                    self.lower[j]
                }
            })
            .collect()
    }
}

/// Per-feature minimum and maximum over the instances (columns of `f`).
pub fn feature_bounds(f: &DMatrix<f64>) -> Result<FeatureBounds> {
    if f.nrows() == 0 || f.ncols() == 0 {
        return Err(Error::Boundary("feature matrix is empty".into()));
    }
    let upper: Vec<f64> = f.row_iter().map(|r| r.max()).collect();
    let lower: Vec<f64> = f.row_iter().map(|r| r.min()).collect();
    let degenerate = upper.iter().zip(&lower).map(|(u, l)| u == l).collect();
    Ok(FeatureBounds {
        upper,
        lower,
        degenerate,
    })
}

/// All 2^n corner masks in ascending binary order.
pub fn all_vertices(n: usize) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::Boundary("no features".into()));
    }
    if n > MAX_BOUNDARY_FEATURES {
        return Err(Error::Boundary(format!(
            "{n} features would need 2^{n} corners; at most {MAX_BOUNDARY_FEATURES} features are supported"
        )));
    }
    Ok((0..1u32 << n).collect())
}

/// Drops corners that put a strongly correlated feature pair at opposite
/// extremes (positive correlation) or at the same extreme (negative). A
/// corner is dropped when any single pair offends. Survivors keep their
/// ascending binary order.
pub fn prune_vertices(vertices: &[u32], rho: &DMatrix<f64>, threshold: f64) -> Result<Vec<u32>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Boundary(format!(
            "correlation threshold {threshold} is outside (0, 1]"
        )));
    }
    let n = rho.nrows();
    if rho.ncols() != n {
        return Err(Error::Boundary("correlation matrix is not square".into()));
    }
    for a in 0..n {
        if (rho[(a, a)] - 1.0).abs() > 1e-9 {
            return Err(Error::Boundary("correlation matrix diagonal must be 1".into()));
        }
        for b in 0..a {
            if (rho[(a, b)] - rho[(b, a)]).abs() > 1e-9 {
                return Err(Error::Boundary("correlation matrix is not symmetric".into()));
            }
        }
    }
    // (a, b, same): a corner offends when (bit a == bit b) == same
    let mut rules: Vec<(usize, usize, bool)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let r = rho[(a, b)];
            if r.abs() >= threshold {
                rules.push((a, b, r < 0.0));
            }
        }
    }
    Ok(vertices
        .par_iter()
        .copied()
        .filter(|&m| !rules.iter().any(|&(a, b, same)| ((m >> a & 1) == (m >> b & 1)) == same))
        .collect())
}

/// Projects corners through `a` (2 x n) and returns their convex hull,
/// counter-clockwise from the lexicographically smallest vertex.
pub fn boundary_polygon(vertices: &[u32], bounds: &FeatureBounds, a: &DMatrix<f64>) -> Result<Vec<Pt>> {
    if a.nrows() != 2 || a.ncols() != bounds.len() {
        return Err(Error::Boundary(format!(
            "projection is {}x{} but there are {} features",
            a.nrows(),
            a.ncols(),
            bounds.len()
        )));
    }
    let advice = "raise the correlation threshold so fewer corners are pruned";
    if vertices.len() < 3 {
        return Err(Error::Boundary(format!(
            "only {} corners survive pruning; {advice}",
            vertices.len()
        )));
    }
    let pts: Vec<Pt> = vertices.par_iter().map(|&m| project(a, &bounds.corner(m))).collect();
    let hull = geometry::convex_hull(&pts);
    if hull.len() < 3 {
        return Err(Error::Boundary(format!("projected corners are collinear; {advice}")));
    }
    Ok(hull)
}

fn project(a: &DMatrix<f64>, x: &[f64]) -> Pt {
    let mut z = [0.0; 2];
    for (r, zr) in z.iter_mut().enumerate() {
        *zr = x.iter().enumerate().map(|(j, v)| a[(r, j)] * v).sum();
    }
    z
}

#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub bounds: FeatureBounds,
    /// Surviving corner masks (bit `j` = upper bound of feature `j`).
    pub vertices: Vec<u32>,
    /// Corner count before pruning, 2^n.
    pub q: usize,
    pub pruned_count: usize,
    pub hull: Vec<Pt>,
    pub threshold: f64,
}

impl BoundarySpec {
    pub fn area(&self) -> f64 {
        geometry::ring_area(&self.hull)
    }

    /// Dense n x q' matrix of surviving corners, one per column.
    pub fn vertex_matrix(&self) -> DMatrix<f64> {
        let n = self.bounds.len();
        let mut v = DMatrix::zeros(n, self.vertices.len());
        for (c, &m) in self.vertices.iter().enumerate() {
            for (j, x) in self.bounds.corner(m).into_iter().enumerate() {
                v[(j, c)] = x;
            }
        }
        v
    }
}

/// Bounds, pruning and hull for features `f` (n x instances, the scale the
/// projection was fitted on), correlations `rho` and projection `a`.
pub fn estimate_boundary(
    f: &DMatrix<f64>,
    rho: &DMatrix<f64>,
    a: &DMatrix<f64>,
    threshold: f64,
) -> Result<BoundarySpec> {
    let bounds = feature_bounds(f)?;
    let all = all_vertices(bounds.len())?;
    let q = all.len();
    let vertices = prune_vertices(&all, rho, threshold)?;
    let hull = boundary_polygon(&vertices, &bounds, a)?;
    Ok(BoundarySpec {
        pruned_count: q - vertices.len(),
        bounds,
        vertices,
        q,
        hull,
        threshold,
    })
}

/// Plain-text summary; `instances` are the projected training coordinates.
pub fn boundary_report(spec: &BoundarySpec, instances: &[Pt], fingerprint: &str) -> String {
    let inst_area = geometry::ring_area(&geometry::convex_hull(instances));
    let area = spec.area();
    let fraction = if area > 0.0 { inst_area / area } else { 0.0 };
    let degenerate = spec.bounds.degenerate.iter().filter(|&&d| d).count();
    format!(
        "# {fingerprint}\nfeatures = {}\ndegenerate_features = {degenerate}\ncorrelation_threshold = {}\nq = {}\npruned_count = {}\nsurviving = {}\nhull_vertices = {}\nhull_area = {area:.9}\ninstance_hull_area = {inst_area:.9}\noccupied_fraction = {fraction:.9}\n",
        spec.bounds.len(),
        spec.threshold,
        spec.q,
        spec.pruned_count,
        spec.vertices.len(),
        spec.hull.len(),
    )
}

pub fn boundary_to_geojson(spec: &BoundarySpec, fingerprint: &str) -> String {
    let mut ring: Vec<Value> = spec.hull.iter().map(|p| json!([p[0], p[1]])).collect();
    ring.push(json!([spec.hull[0][0], spec.hull[0][1]]));
    let doc = json!({
        "type": "FeatureCollection",
        "fingerprint": fingerprint,
        "features": [{
            "type": "Feature",
            "properties": {
                "q": spec.q,
                "pruned_count": spec.pruned_count,
                "threshold": spec.threshold,
                "area": spec.area(),
            },
            "geometry": {"type": "Polygon", "coordinates": [ring]},
        }],
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("boundary json");
    s.push('\n');
    s
}

/// Reads the hull ring (without the closing vertex) and fingerprint from a
/// file written by [`boundary_to_geojson`].
pub fn parse_boundary_geojson(text: &str) -> Result<(Vec<Pt>, String)> {
    let bad = |m: &str| Error::Boundary(format!("geojson: {m}"));
    let doc: Value = serde_json::from_str(text)?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(bad("expected a FeatureCollection"));
    }
    let fingerprint = doc
        .get("fingerprint")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing fingerprint"))?;
    let geom = doc
        .get("features")
        .and_then(Value::as_array)
        .and_then(|f| f.first())
        .and_then(|f| f.get("geometry"))
        .ok_or_else(|| bad("missing geometry"))?;
    if geom.get("type").and_then(Value::as_str) != Some("Polygon") {
        return Err(bad("geometry must be a Polygon"));
    }
    let ring = geom
        .get("coordinates")
        .and_then(Value::as_array)
        .and_then(|r| r.first())
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing ring"))?;
    let mut pts = Vec::with_capacity(ring.len());
    for p in ring {
        let xy = p
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| bad("position must be [x, y]"))?;
        match (xy[0].as_f64(), xy[1].as_f64()) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => pts.push([x, y]),
            _ => return Err(bad("non-numeric coordinate")),
        }
    }
    if pts.len() < 4 || pts.first() != pts.last() {
        return Err(bad("ring must be closed with at least four positions"));
    }
    pts.pop();
    Ok((pts, fingerprint.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rho2(r: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0])
    }

    #[test]
    fn bounds_of_a_row() {
        let f = DMatrix::from_row_slice(2, 3, &[-1.0, 0.0, 2.0, 4.0, 4.0, 4.0]);
        let b = feature_bounds(&f).unwrap();
        assert_eq!((b.lower[0], b.upper[0]), (-1.0, 2.0));
        assert_eq!(b.degenerate, vec![false, true]);
        assert_eq!(all_vertices(9).unwrap().len(), 512);
        assert!(all_vertices(21).is_err());
    }

    #[test]
    fn pruning_rules_for_two_features() {
        let v = all_vertices(2).unwrap();
        assert_eq!(prune_vertices(&v, &rho2(0.5), 0.7).unwrap(), vec![0, 1, 2, 3]);
        // bit 0 = feature 0 upper: 1 = (U,L), 2 = (L,U)
        assert_eq!(prune_vertices(&v, &rho2(0.9), 0.7).unwrap(), vec![0, 3]);
        assert_eq!(prune_vertices(&v, &rho2(-0.9), 0.7).unwrap(), vec![1, 2]);
        assert!(prune_vertices(&v, &rho2(0.9), 0.0).is_err());
        assert!(prune_vertices(&v, &rho2(0.9), 1.5).is_err());
        assert_eq!(prune_vertices(&v, &rho2(0.99), 1.0).unwrap(), v);
    }

    #[test]
    fn identity_projection_gives_bounding_rectangle() {
        let f = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 3.0, -1.0, 2.0, 0.0]);
        let a = DMatrix::identity(2, 2);
        let spec = estimate_boundary(&f, &rho2(0.0), &a, 0.7).unwrap();
        assert_eq!(spec.hull, vec![[0.0, -1.0], [3.0, -1.0], [3.0, 2.0], [0.0, 2.0]]);
        assert_eq!(spec.area(), 9.0);
        let (ring, print) = parse_boundary_geojson(&boundary_to_geojson(&spec, "fp")).unwrap();
        assert_eq!(ring, spec.hull);
        assert_eq!(print, "fp");
    }

    #[test]
    fn too_few_survivors_is_an_error() {
        let f = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        let err = estimate_boundary(&f, &rho2(0.9), &DMatrix::identity(2, 2), 0.7).unwrap_err();
        assert!(err.to_string().contains("raise the correlation threshold"));
    }

    proptest! {
        #[test]
        fn unpruned_hull_contains_instances(
            vals in prop::collection::vec(-5.0f64..5.0, 4 * 12),
            avals in prop::collection::vec(-2.0f64..2.0, 8),
        ) {
            let f = DMatrix::from_row_slice(4, 12, &vals);
            let a = DMatrix::from_row_slice(2, 4, &avals);
            let bounds = feature_bounds(&f).unwrap();
            let all = all_vertices(4).unwrap();
            if let Ok(hull) = boundary_polygon(&all, &bounds, &a) {
                let poly = geometry::polygon_from_ring(&hull);
                let tol = 1e-9 * geometry::extent(&hull).max(1.0);
                let z = &a * &f;
                for c in 0..12 {
                    prop_assert!(geometry::polygon_contains(&poly, [z[(0, c)], z[(1, c)]], tol));
                }
            }
        }

        #[test]
        fn lowering_threshold_never_adds_vertices(r in -1.0f64..1.0, s in -1.0f64..1.0, t1 in 0.05f64..1.0, t2 in 0.05f64..1.0) {
            let rho = DMatrix::from_row_slice(3, 3, &[1.0, r, s, r, 1.0, 0.3, s, 0.3, 1.0]);
            let v = all_vertices(3).unwrap();
            let (hi, lo) = (t1.max(t2), t1.min(t2));
            let a = prune_vertices(&v, &rho, hi).unwrap();
            let b = prune_vertices(&v, &rho, lo).unwrap();
            prop_assert!(b.iter().all(|m| a.contains(m)));
        }
    }
}
