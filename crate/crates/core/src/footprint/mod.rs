//! Footprints: regions of the instance space where a technique is good or
//! best, measured by area, density and purity relative to the whole space.

pub mod alpha;
pub mod dbscan;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

use geo::{BooleanOps, Coord, LineString, MultiPolygon, Polygon};
use log::{debug, warn};
use rayon::prelude::*;
use serde_json::{json, Value};

pub use alpha::{alpha_shape, AlphaRadius, AlphaShape};
pub use dbscan::{cluster_count, dbscan, dbscan_params, EpsilonScale, NOISE};

use crate::error::{Error, Result};
use crate::geometry::{self, Pt};
use crate::metadata::GoodnessMatrix;

/// In-overlap purities closer than this are a tie and both footprints keep
/// the overlap.
pub const PURITY_TIE: f64 = 1e-9;
/// Overlaps at or below this fraction of the space area are ignored.
pub const OVERLAP_AREA_FRACTION: f64 = 1e-9;
/// Point-in-polygon boundary tolerance as a fraction of the space extent.
/// Polygon booleans snap coordinates to a grid of roughly 1e-9 of the extent.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;
const MAX_CONFLICT_PASSES: usize = 16;

pub const SUMMARY_HEADER: [&str; 7] = [
    "technique",
    "alpha_N_G",
    "d_N_G",
    "p_N_G",
    "alpha_N_B",
    "d_N_B",
    "p_N_B",
];
pub const AVERAGE_LABEL: &str = "Average";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FootprintKind {
    Good,
    Best,
}

impl FootprintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FootprintKind::Good => "good",
            FootprintKind::Best => "best",
        }
    }
}

impl std::str::FromStr for FootprintKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "good" => Ok(FootprintKind::Good),
            "best" => Ok(FootprintKind::Best),
            _ => Err(Error::Footprint(format!("unknown footprint kind '{s}'"))),
        }
    }
}

/// Convex hull of every instance, the reference for normalised metrics.
#[derive(Debug, Clone)]
pub struct SpaceBaseline {
    pub hull: Vec<Pt>,
    pub area: f64,
    pub density: f64,
    /// Absolute point-in-polygon boundary tolerance.
    pub tolerance: f64,
}

impl SpaceBaseline {
    pub fn new(z: &[Pt]) -> Result<Self> {
        let hull = geometry::convex_hull(z);
        let area = geometry::ring_area(&hull);
        if hull.len() < 3 || area <= 0.0 {
            return Err(Error::Footprint(
                "instance coordinates span no area; the space hull is degenerate".into(),
            ));
        }
        Ok(Self {
            density: z.len() as f64 / area,
            tolerance: BOUNDARY_TOLERANCE * geometry::extent(z),
            hull,
            area,
        })
    }

    pub fn hull_polygon(&self) -> Polygon<f64> {
        geometry::polygon_from_ring(&self.hull)
    }

    pub fn contains(&self, p: Pt) -> bool {
        geometry::polygon_contains(&self.hull_polygon(), p, self.tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FootprintMetrics {
    pub area: f64,
    pub density: f64,
    pub purity: f64,
    pub alpha_n: f64,
    pub d_n: f64,
    pub p_n: f64,
    pub enclosed: usize,
    /// Enclosed instances on which the technique is good (or best).
    pub enclosed_flagged: usize,
    /// Set when the polygons have no area and all metrics are zero.
    pub degenerate: bool,
}

/// Area, density and purity of `polygons`; `flags` marks the instances on
/// which the technique is good (or best).
pub fn footprint_metrics(
    polygons: &MultiPolygon<f64>,
    z: &[Pt],
    flags: &[bool],
    baseline: &SpaceBaseline,
) -> FootprintMetrics {
    let area = geometry::multipolygon_area(polygons);
    if area <= 0.0 {
        return FootprintMetrics {
            degenerate: true,
            ..Default::default()
        };
    }
    let (enclosed, flagged) = enclosed_counts(polygons, z, flags, baseline.tolerance);
    let density = enclosed as f64 / area;
    let purity = if enclosed == 0 {
        0.0
    } else {
        flagged as f64 / enclosed as f64
    };
    FootprintMetrics {
        area,
        density,
        purity,
        alpha_n: 100.0 * area / baseline.area,
        d_n: 100.0 * density / baseline.density,
        p_n: 100.0 * purity,
        enclosed,
        enclosed_flagged: flagged,
        degenerate: false,
    }
}

fn enclosed_counts(polygons: &MultiPolygon<f64>, z: &[Pt], flags: &[bool], tol: f64) -> (usize, usize) {
    let mut enclosed = 0;
    let mut flagged = 0;
    for (p, &f) in z.iter().zip(flags) {
        if geometry::multipolygon_contains(polygons, *p, tol) {
            enclosed += 1;
            flagged += f as usize;
        }
    }
    (enclosed, flagged)
}

#[derive(Debug, Clone)]
pub struct Footprint {
    pub technique: String,
    pub technique_index: usize,
    pub kind: FootprintKind,
    pub polygons: MultiPolygon<f64>,
    pub metrics: FootprintMetrics,
}

impl Footprint {
    pub fn id(&self) -> String {
        format!("{}/{}", self.technique, self.kind.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FootprintConfig {
    pub alpha_radius: AlphaRadius,
    pub epsilon_scale: EpsilonScale,
}

fn range(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Distinct coordinates, with -0.0 and 0.0 treated as equal.
pub fn unique_count(points: &[Pt]) -> usize {
    let key = |v: f64| if v == 0.0 { 0u64 } else { v.to_bits() };
    points
        .iter()
        .map(|p| (key(p[0]), key(p[1])))
        .collect::<HashSet<_>>()
        .len()
}

fn bool_op(left: &Footprint, right_id: &str, op: impl FnOnce() -> MultiPolygon<f64>) -> Result<MultiPolygon<f64>> {
    let fail = || Error::BooleanOp {
        left: left.id(),
        right: right_id.to_string(),
    };
    let out = catch_unwind(AssertUnwindSafe(op)).map_err(|_| fail())?;
    let finite = out.0.iter().all(|poly| {
        std::iter::once(poly.exterior())
            .chain(poly.interiors())
            .all(|r| r.coords().all(|c| c.x.is_finite() && c.y.is_finite()))
    });
    if finite {
        Ok(out)
    } else {
        Err(fail())
    }
}

/// Clusters the flagged instances, wraps each cluster in an alpha shape and
/// clips the union to the space hull.
pub fn build_footprint(
    technique: &str,
    technique_index: usize,
    kind: FootprintKind,
    z: &[Pt],
    flags: &[bool],
    baseline: &SpaceBaseline,
    cfg: &FootprintConfig,
) -> Result<Footprint> {
    let pts: Vec<Pt> = z.iter().zip(flags).filter(|(_, &f)| f).map(|(p, _)| *p).collect();
    let mut fp = Footprint {
        technique: technique.to_string(),
        technique_index,
        kind,
        polygons: MultiPolygon::new(vec![]),
        metrics: FootprintMetrics {
            degenerate: true,
            ..Default::default()
        },
    };
    let r = unique_count(&pts);
    if r < 3 {
        debug!("{}: {r} unique instances, no footprint", fp.id());
        return Ok(fp);
    }
    let (k, eps) = cfg
        .epsilon_scale
        .epsilon(r, range(pts.iter().map(|p| p[0])), range(pts.iter().map(|p| p[1])));
    if eps <= 0.0 {
        warn!("{}: instances lie on an axis-parallel line, no footprint", fp.id());
        return Ok(fp);
    }
    let labels = dbscan(&pts, k, eps);
    let n_clusters = cluster_count(&labels);
    debug!("{}: r={r} k={k} eps={eps:.6} clusters={n_clusters}", fp.id());
    let mut union = MultiPolygon::new(vec![]);
    for c in 1..=n_clusters as i32 {
        let members: Vec<Pt> = pts
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| *p)
            .collect();
        let shape = alpha_shape(&members, cfg.alpha_radius);
        if shape.is_empty() {
            debug!("{}: cluster {c} ({} points) has no area", fp.id(), members.len());
            continue;
        }
        union = if union.0.is_empty() {
            shape.polygons
        } else {
            bool_op(&fp, &format!("cluster {c}"), || union.union(&shape.polygons))?
        };
    }
    if !union.0.is_empty() {
        let hull = baseline.hull_polygon();
        let clipped = bool_op(&fp, "space hull", || union.intersection(&hull))?;
        if !geometry::within_ring(&clipped, &baseline.hull, baseline.tolerance) {
            return Err(Error::Footprint(format!(
                "{} escapes the space hull after clipping",
                fp.id()
            )));
        }
        fp.polygons = clipped;
    }
    fp.metrics = footprint_metrics(&fp.polygons, z, flags, baseline);
    Ok(fp)
}

/// In-overlap purity of two footprints over the instances inside `region`.
fn overlap_purities(region: &MultiPolygon<f64>, z: &[Pt], fa: &[bool], fb: &[bool], tol: f64) -> (f64, f64) {
    let (mut n, mut a, mut b) = (0usize, 0usize, 0usize);
    for (i, p) in z.iter().enumerate() {
        if geometry::multipolygon_contains(region, *p, tol) {
            n += 1;
            a += fa[i] as usize;
            b += fb[i] as usize;
        }
    }
    if n == 0 {
        (0.0, 0.0)
    } else {
        (a as f64 / n as f64, b as f64 / n as f64)
    }
}

/// Area of the overlap of two footprints, or `None` when it is negligible.
pub fn significant_overlap(
    a: &Footprint,
    b: &Footprint,
    baseline: &SpaceBaseline,
) -> Result<Option<MultiPolygon<f64>>> {
    if a.polygons.0.is_empty() || b.polygons.0.is_empty() {
        return Ok(None);
    }
    let inter = bool_op(a, &b.id(), || a.polygons.intersection(&b.polygons))?;
    let area = geometry::multipolygon_area(&inter);
    Ok((area > OVERLAP_AREA_FRACTION * baseline.area).then_some(inter))
}

/// For each overlapping pair (in technique order), the footprint with the
/// lower purity inside the overlap gives it up; ties keep it in both.
/// Passes repeat until no pair changes. `flags[j]` belongs to `best[j]`.
pub fn resolve_conflicts(
    mut best: Vec<Footprint>,
    z: &[Pt],
    flags: &[Vec<bool>],
    baseline: &SpaceBaseline,
) -> Result<Vec<Footprint>> {
    assert_eq!(best.len(), flags.len());
    let mut order: Vec<usize> = (0..best.len()).collect();
    order.sort_by_key(|&j| best[j].technique_index);
    for pass in 0..MAX_CONFLICT_PASSES {
        let mut changed = false;
        for (x, &a) in order.iter().enumerate() {
            for &b in &order[x + 1..] {
                let Some(inter) = significant_overlap(&best[a], &best[b], baseline)? else {
                    continue;
                };
                let (pa, pb) = overlap_purities(&inter, z, &flags[a], &flags[b], baseline.tolerance);
                if (pa - pb).abs() <= PURITY_TIE {
                    continue;
                }
                let (winner, loser) = if pa > pb { (a, b) } else { (b, a) };
                debug!(
                    "pass {pass}: {} ({:.4}) loses overlap to {} ({:.4})",
                    best[loser].id(),
                    pa.min(pb),
                    best[winner].id(),
                    pa.max(pb)
                );
                let trimmed = {
                    let (l, w) = (&best[loser], &best[winner]);
                    bool_op(l, &w.id(), || l.polygons.difference(&w.polygons))?
                };
                best[loser].polygons = trimmed;
                best[loser].metrics = footprint_metrics(&best[loser].polygons, z, &flags[loser], baseline);
                changed = true;
            }
        }
        if !changed {
            return Ok(best);
        }
    }
    warn!("conflict resolution did not settle after {MAX_CONFLICT_PASSES} passes");
    Ok(best)
}

/// Good and best footprints for every technique, best ones conflict-resolved.
#[derive(Debug, Clone)]
pub struct FootprintSet {
    pub good: Vec<Footprint>,
    pub best: Vec<Footprint>,
}

pub fn build_footprints(
    technique_names: &[String],
    z: &[Pt],
    goodness: &GoodnessMatrix,
    baseline: &SpaceBaseline,
    cfg: &FootprintConfig,
) -> Result<FootprintSet> {
    let t = technique_names.len();
    let jobs: Vec<(usize, FootprintKind)> = (0..t)
        .flat_map(|j| [(j, FootprintKind::Good), (j, FootprintKind::Best)])
        .collect();
    let built: Vec<Footprint> = jobs
        .par_iter()
        .map(|&(j, kind)| {
            let flags = match kind {
                FootprintKind::Good => goodness.good_row(j),
                FootprintKind::Best => goodness.best_row(j),
            };
            build_footprint(&technique_names[j], j, kind, z, &flags, baseline, cfg)
        })
        .collect::<Result<_>>()?;
    let (good, best): (Vec<_>, Vec<_>) = built.into_iter().partition(|f| f.kind == FootprintKind::Good);
    let best_flags: Vec<Vec<bool>> = (0..t).map(|j| goodness.best_row(j)).collect();
    let best = resolve_conflicts(best, z, &best_flags, baseline)?;
    Ok(FootprintSet { good, best })
}

/// One line of the footprint summary: normalised area, density and purity
/// for the good and best footprints.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub technique: String,
    pub good: [f64; 3],
    pub best: [f64; 3],
}

impl SummaryRow {
    fn from_metrics(technique: &str, g: &FootprintMetrics, b: &FootprintMetrics) -> Self {
        Self {
            technique: technique.to_string(),
            good: [g.alpha_n, g.d_n, g.p_n],
            best: [b.alpha_n, b.d_n, b.p_n],
        }
    }

    pub fn values(&self) -> [f64; 6] {
        let [a, b, c] = self.good;
        let [d, e, f] = self.best;
        [a, b, c, d, e, f]
    }
}

impl FootprintSet {
    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        self.good
            .iter()
            .zip(&self.best)
            .map(|(g, b)| SummaryRow::from_metrics(&g.technique, &g.metrics, &b.metrics))
            .collect()
    }
}

/// Plain column means over the technique rows.
pub fn average_row(rows: &[SummaryRow]) -> SummaryRow {
    let mut sums = [0.0; 6];
    for r in rows {
        for (s, v) in sums.iter_mut().zip(r.values()) {
            *s += v;
        }
    }
    let n = rows.len().max(1) as f64;
    let m: Vec<f64> = sums.iter().map(|s| s / n).collect();
    SummaryRow {
        technique: AVERAGE_LABEL.to_string(),
        good: [m[0], m[1], m[2]],
        best: [m[3], m[4], m[5]],
    }
}

/// Summary table with one row per technique followed by the average row.
pub fn summary_csv(rows: &[SummaryRow], header_comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = header_comment {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str(&SUMMARY_HEADER.join(","));
    out.push('\n');
    let avg = average_row(rows);
    for r in rows.iter().chain(std::iter::once(&avg)) {
        out.push_str(&csv_field(&r.technique));
        for v in r.values() {
            out.push_str(&format!(",{v:.6}"));
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses a summary table; the average row, when present, is returned last.
pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != SUMMARY_HEADER {
        return Err(Error::Footprint(format!(
            "summary header {:?} does not match {:?}",
            header, SUMMARY_HEADER
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut v = [0.0; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            let cell = &rec[k + 1];
            *slot = cell.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                Error::Footprint(format!(
                    "summary value '{cell}' in column {} is not a number",
                    SUMMARY_HEADER[k + 1]
                ))
            })?;
        }
        rows.push(SummaryRow {
            technique: rec[0].to_string(),
            good: [v[0], v[1], v[2]],
            best: [v[3], v[4], v[5]],
        });
    }
    Ok(rows)
}

fn ring_json(ls: &LineString<f64>) -> Value {
    Value::Array(ls.coords().map(|c| json!([c.x, c.y])).collect())
}

/// A footprint as a GeoJSON feature collection holding one MultiPolygon
/// feature with the metrics as properties.
pub fn footprint_to_geojson(fp: &Footprint, fingerprint: &str) -> String {
    let coords: Vec<Value> = fp
        .polygons
        .0
        .iter()
        .map(|poly| {
            let mut rings = vec![ring_json(poly.exterior())];
            rings.extend(poly.interiors().iter().map(ring_json));
            Value::Array(rings)
        })
        .collect();
    let m = &fp.metrics;
    let doc = json!({
        "type": "FeatureCollection",
        "fingerprint": fingerprint,
        "features": [{
            "type": "Feature",
            "properties": {
                "technique": fp.technique,
                "technique_index": fp.technique_index,
                "kind": fp.kind.as_str(),
                "area": m.area,
                "density": m.density,
                "purity": m.purity,
                "alpha_n": m.alpha_n,
                "d_n": m.d_n,
                "p_n": m.p_n,
                "enclosed": m.enclosed,
                "enclosed_flagged": m.enclosed_flagged,
                "degenerate": m.degenerate,
            },
            "geometry": {"type": "MultiPolygon", "coordinates": coords},
        }],
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("footprint json");
    s.push('\n');
    s
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Footprint(format!("geojson: {}", msg.into()))
}

fn parse_ring(v: &Value) -> Result<LineString<f64>> {
    let pts = v.as_array().ok_or_else(|| bad("ring is not an array"))?;
    let mut coords = Vec::with_capacity(pts.len());
    for p in pts {
        let xy = p
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| bad("position must be [x, y]"))?;
        let x = xy[0]
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad("non-numeric coordinate"))?;
        let y = xy[1]
            .as_f64()
            .filter(|y| y.is_finite())
            .ok_or_else(|| bad("non-numeric coordinate"))?;
        coords.push(Coord { x, y });
    }
    if coords.len() < 4 || coords.first() != coords.last() {
        return Err(bad("ring must be closed with at least four positions"));
    }
    Ok(LineString::new(coords))
}

/// Parses a file written by [`footprint_to_geojson`], returning the footprint
/// and its fingerprint.
pub fn parse_footprint_geojson(text: &str) -> Result<(Footprint, String)> {
    let doc: Value = serde_json::from_str(text)?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(bad("expected a FeatureCollection"));
    }
    let fingerprint = doc
        .get("fingerprint")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing fingerprint"))?
        .to_string();
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing features"))?;
    let [feature] = features.as_slice() else {
        return Err(bad("expected exactly one feature"));
    };
    let props = feature.get("properties").ok_or_else(|| bad("missing properties"))?;
    let num = |k: &str| -> Result<f64> {
        props
            .get(k)
            .and_then(Value::as_f64)
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("property '{k}' missing or not a number")))
    };
    let count = |k: &str| -> Result<usize> {
        props
            .get(k)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| bad(format!("property '{k}' missing or not a count")))
    };
    let technique = props
        .get("technique")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing technique"))?
        .to_string();
    let kind: FootprintKind = props
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing kind"))?
        .parse()?;
    let metrics = FootprintMetrics {
        area: num("area")?,
        density: num("density")?,
        purity: num("purity")?,
        alpha_n: num("alpha_n")?,
        d_n: num("d_n")?,
        p_n: num("p_n")?,
        enclosed: count("enclosed")?,
        enclosed_flagged: count("enclosed_flagged")?,
        degenerate: props
            .get("degenerate")
            .and_then(Value::as_bool)
            .ok_or_else(|| bad("missing degenerate"))?,
    };
    if !(0.0..=1.0).contains(&metrics.purity) || metrics.area < 0.0 || metrics.enclosed_flagged > metrics.enclosed {
        return Err(bad("metrics out of range"));
    }
    let geom = feature.get("geometry").ok_or_else(|| bad("missing geometry"))?;
    if geom.get("type").and_then(Value::as_str) != Some("MultiPolygon") {
        return Err(bad("geometry must be a MultiPolygon"));
    }
    let polys = geom
        .get("coordinates")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing coordinates"))?;
    let mut out = Vec::with_capacity(polys.len());
    for poly in polys {
        let rings = poly.as_array().ok_or_else(|| bad("polygon is not an array"))?;
        let (ext, holes) = rings
            .split_first()
            .ok_or_else(|| bad("polygon without exterior ring"))?;
        let interiors = holes.iter().map(parse_ring).collect::<Result<Vec<_>>>()?;
        out.push(Polygon::new(parse_ring(ext)?, interiors));
    }
    Ok((
        Footprint {
            technique,
            technique_index: count("technique_index")?,
            kind,
            polygons: MultiPolygon::new(out),
            metrics,
        },
        fingerprint,
    ))
}
