//! Deterministic SVG scatter plots of the instance space.

use std::fmt::Write;

use geo::{LineString, MultiPolygon};

use crate::artifact::stamp;
use crate::error::{Error, Result};
use crate::footprint::Footprint;
use crate::geometry::Pt;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 64.0;
const LEGEND_W: f64 = 180.0;
const POINT_R: f64 = 2.5;

/// Categorical palette; colours are assigned by sorted label order.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layer {
    Sources,
    Performance(String),
    Feature(String),
    /// Best footprints of every technique.
    Footprints,
    /// Good and best footprints of one technique.
    TechniqueFootprints(String),
    Boundary,
}

impl std::str::FromStr for Layer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a.to_string())),
            None => (s, None),
        };
        match (head, arg) {
            ("sources", None) => Ok(Layer::Sources),
            ("performance", Some(t)) => Ok(Layer::Performance(t)),
            ("feature", Some(f)) => Ok(Layer::Feature(f)),
            ("footprints", None) => Ok(Layer::Footprints),
            ("footprints", Some(t)) => Ok(Layer::TechniqueFootprints(t)),
            ("boundary", None) => Ok(Layer::Boundary),
            _ => Err(Error::Plot(format!(
                "unknown layer `{s}`; expected sources, performance:<technique>, feature:<name>, footprints[:<technique>] or boundary"
            ))),
        }
    }
}

impl Layer {
    /// File stem for the layer's SVG.
    pub fn file_stem(&self) -> String {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect()
        };
        match self {
            Layer::Sources => "sources".into(),
            Layer::Performance(t) => format!("performance_{}", clean(t)),
            Layer::Feature(f) => format!("feature_{}", clean(f)),
            Layer::Footprints => "footprints".into(),
            Layer::TechniqueFootprints(t) => format!("footprints_{}", clean(t)),
            Layer::Boundary => "boundary".into(),
        }
    }
}

/// Everything a layer may draw. Optional parts are required only by the
/// layers that use them.
pub struct PlotData<'a> {
    pub z: &'a [Pt],
    pub sources: &'a [String],
    pub technique_names: &'a [String],
    /// techniques x instances
    pub performance: &'a nalgebra::DMatrix<f64>,
    pub feature_names: &'a [String],
    /// features x instances
    pub features: &'a nalgebra::DMatrix<f64>,
    pub good: Option<&'a [Footprint]>,
    pub best: Option<&'a [Footprint]>,
    pub boundary: Option<&'a [Pt]>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PlotOptions {
    /// Draw the z1 = 0 and z2 = 0 lines with quadrant labels.
    pub quadrants: bool,
}

/// Red (t = 0) to blue (t = 1) through the straight RGB line.
pub fn scale_color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let r = (255.0 * (1.0 - t)).round() as u8;
    let b = (255.0 * t).round() as u8;
    format!("#{r:02x}00{b:02x}")
}

/// Normalises values to [0, 1]; a constant series maps to the midpoint.
pub fn normalise(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![0.5; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

struct Frame {
    cx: f64,
    cy: f64,
    half: f64,
}

impl Frame {
    fn new(points: impl Iterator<Item = Pt>) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if !lo[0].is_finite() {
            lo = [-1.0, -1.0];
            hi = [1.0, 1.0];
        }
        let half = ((hi[0] - lo[0]).max(hi[1] - lo[1]) / 2.0 * 1.05).max(1e-9);
        Self {
            cx: (lo[0] + hi[0]) / 2.0,
            cy: (lo[1] + hi[1]) / 2.0,
            half,
        }
    }

    fn px(&self, p: Pt) -> (f64, f64) {
        let w = SIZE - 2.0 * MARGIN;
        let x = MARGIN + (p[0] - self.cx + self.half) / (2.0 * self.half) * w;
        let y = MARGIN + (self.cy + self.half - p[1]) / (2.0 * self.half) * w;
        (x, y)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn ring_path(out: &mut String, f: &Frame, ls: &LineString<f64>) {
    for (k, c) in ls.coords().enumerate() {
        let (x, y) = f.px([c.x, c.y]);
        let _ = write!(out, "{}{x:.2} {y:.2} ", if k == 0 { "M" } else { "L" });
    }
    out.push('Z');
}

fn polygon_path(out: &mut String, f: &Frame, mp: &MultiPolygon<f64>, fill: &str, opacity: f64) {
    if mp.0.is_empty() {
        return;
    }
    let mut d = String::new();
    for poly in &mp.0 {
        ring_path(&mut d, f, poly.exterior());
        for h in poly.interiors() {
            ring_path(&mut d, f, h);
        }
    }
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="{fill}" fill-opacity="{opacity}" fill-rule="evenodd" stroke="{fill}" stroke-width="1"/>"#,
        d.trim_end()
    );
}

fn axes(out: &mut String, f: &Frame, opts: &PlotOptions) {
    let (x0, x1) = (MARGIN, SIZE - MARGIN);
    let _ = writeln!(
        out,
        r##"<rect x="{x0}" y="{x0}" width="{w}" height="{w}" fill="none" stroke="#000000"/>"##,
        w = x1 - x0
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let vx = f.cx - f.half + 2.0 * f.half * t;
        let vy = f.cy - f.half + 2.0 * f.half * t;
        let (px, _) = f.px([vx, f.cy]);
        let (_, py) = f.px([f.cx, vy]);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{x1}" x2="{px:.2}" y2="{y2}" stroke="#000000"/><text x="{px:.2}" y="{ty}" font-size="11" text-anchor="middle">{vx:.2}</text>"##,
            y2 = x1 + 5.0,
            ty = x1 + 18.0
        );
        let _ = writeln!(
            out,
            r##"<line x1="{a}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#000000"/><text x="{tx}" y="{py:.2}" font-size="11" text-anchor="end" dominant-baseline="middle">{vy:.2}</text>"##,
            a = x0 - 5.0,
            tx = x0 - 8.0
        );
    }
    let mid = SIZE / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="{mid}" y="{y}" font-size="14" text-anchor="middle">z1</text>"#,
        y = SIZE - 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{mid}" font-size="14" text-anchor="middle" transform="rotate(-90 16 {mid})">z2</text>"#
    );
    if opts.quadrants {
        let (ox, oy) = f.px([0.0, 0.0]);
        if (x0..=x1).contains(&ox) {
            let _ = writeln!(
                out,
                r##"<line x1="{ox:.2}" y1="{x0}" x2="{ox:.2}" y2="{x1}" stroke="#999999" stroke-dasharray="4 3"/>"##
            );
        }
        if (x0..=x1).contains(&oy) {
            let _ = writeln!(
                out,
                r##"<line x1="{x0}" y1="{oy:.2}" x2="{x1}" y2="{oy:.2}" stroke="#999999" stroke-dasharray="4 3"/>"##
            );
        }
        for (label, dx, dy) in [
            ("Q1", 1.0, 1.0),
            ("Q2", -1.0, 1.0),
            ("Q3", -1.0, -1.0),
            ("Q4", 1.0, -1.0),
        ] {
            let (qx, qy) = f.px([f.cx + dx * f.half * 0.85, f.cy + dy * f.half * 0.9]);
            let _ = writeln!(
                out,
                r##"<text x="{qx:.2}" y="{qy:.2}" font-size="12" fill="#666666" text-anchor="middle">{label}</text>"##
            );
        }
    }
}

fn points(out: &mut String, f: &Frame, z: &[Pt], colors: &[String]) {
    for (p, c) in z.iter().zip(colors) {
        let (x, y) = f.px(*p);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{POINT_R}" fill="{c}"/>"#);
    }
}

fn legend_entries(out: &mut String, title: &str, entries: &[(String, String)]) {
    let x = SIZE + 8.0;
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{y}" font-size="13" font-weight="bold">{}</text>"#,
        esc(title),
        y = MARGIN
    );
    for (k, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN + 18.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{ry}" width="12" height="12" fill="{color}"/><text x="{tx}" y="{ty}" font-size="12">{}</text>"#,
            esc(label),
            ry = y - 10.0,
            tx = x + 18.0,
            ty = y
        );
    }
}

fn colour_bar(out: &mut String, title: &str, lo: f64, hi: f64) {
    let x = SIZE + 8.0;
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{y}" font-size="13" font-weight="bold">{}</text>"#,
        esc(title),
        y = MARGIN
    );
    let steps = 20;
    let h = (SIZE - 2.0 * MARGIN - 30.0) / steps as f64;
    for k in 0..steps {
        // top = max (blue), bottom = min (red)
        let t = 1.0 - (k as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{y:.2}" width="16" height="{h2:.2}" fill="{}"/>"#,
            scale_color(t),
            y = MARGIN + 16.0 + h * k as f64,
            h2 = h + 0.5
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{tx}" y="{y}" font-size="11">{hi:.4}</text><text x="{tx}" y="{y2:.2}" font-size="11">{lo:.4}</text>"#,
        tx = x + 22.0,
        y = MARGIN + 26.0,
        y2 = MARGIN + 16.0 + h * steps as f64
    );
}

fn find(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Plot(format!("unknown {what} `{name}`; valid names: {}", names.join(", "))))
}

/// Renders one layer as an SVG document stamped with `fingerprint`.
pub fn render(layer: &Layer, data: &PlotData, fingerprint: &str, opts: &PlotOptions) -> Result<String> {
    let mut extra: Vec<Pt> = Vec::new();
    if matches!(layer, Layer::Boundary) {
        let hull = data
            .boundary
            .ok_or_else(|| Error::Plot("boundary layer needs the boundary hull".into()))?;
        extra.extend_from_slice(hull);
    }
    let frame = Frame::new(data.z.iter().copied().chain(extra.iter().copied()));
    let mut body = String::new();
    let grey = vec!["#b0b0b0".to_string(); data.z.len()];
    let title;
    match layer {
        Layer::Sources => {
            title = "sources".to_string();
            let mut labels: Vec<&String> = data.sources.iter().collect();
            labels.sort();
            labels.dedup();
            let color_of = |s: &String| PALETTE[labels.binary_search(&s).unwrap_or(0) % PALETTE.len()].to_string();
            let colors: Vec<String> = data.sources.iter().map(color_of).collect();
            points(&mut body, &frame, data.z, &colors);
            let entries: Vec<(String, String)> = labels.iter().map(|s| ((*s).clone(), color_of(s))).collect();
            legend_entries(&mut body, "source", &entries);
        }
        Layer::Performance(t) => {
            let j = find(data.technique_names, t, "technique")?;
            let vals: Vec<f64> = data.performance.row(j).iter().copied().collect();
            title = format!("performance: {t}");
            let colors: Vec<String> = normalise(&vals).into_iter().map(scale_color).collect();
            points(&mut body, &frame, data.z, &colors);
            let (lo, hi) = min_max(&vals);
            colour_bar(&mut body, t, lo, hi);
        }
        Layer::Feature(name) => {
            let j = find(data.feature_names, name, "feature")?;
            let vals: Vec<f64> = data.features.row(j).iter().copied().collect();
            title = format!("feature: {name}");
            let colors: Vec<String> = normalise(&vals).into_iter().map(scale_color).collect();
            points(&mut body, &frame, data.z, &colors);
            let (lo, hi) = min_max(&vals);
            colour_bar(&mut body, name, lo, hi);
        }
        Layer::Footprints => {
            let best = data
                .best
                .ok_or_else(|| Error::Plot("footprints layer needs footprints".into()))?;
            title = "best footprints".to_string();
            points(&mut body, &frame, data.z, &grey);
            let mut entries = Vec::new();
            for fp in best {
                let color = PALETTE[fp.technique_index % PALETTE.len()];
                polygon_path(&mut body, &frame, &fp.polygons, color, 0.45);
                entries.push((fp.technique.clone(), color.to_string()));
            }
            legend_entries(&mut body, "technique (best)", &entries);
        }
        Layer::TechniqueFootprints(t) => {
            let j = find(data.technique_names, t, "technique")?;
            let pick = |set: Option<&[Footprint]>| {
                set.and_then(|s| s.iter().find(|f| f.technique_index == j).cloned())
                    .ok_or_else(|| Error::Plot(format!("no footprints for technique `{t}`")))
            };
            let (good, best) = (pick(data.good)?, pick(data.best)?);
            title = format!("footprints: {t}");
            let colors: Vec<String> = data
                .performance
                .row(j)
                .iter()
                .zip(data.performance.column_iter())
                .map(|(v, col)| {
                    let m = col.max();
                    if m - v <= 1e-9 {
                        "#1f4e9e".into()
                    } else {
                        "#b0b0b0".into()
                    }
                })
                .collect();
            polygon_path(&mut body, &frame, &good.polygons, "#6baed6", 0.35);
            polygon_path(&mut body, &frame, &best.polygons, "#08306b", 0.45);
            points(&mut body, &frame, data.z, &colors);
            legend_entries(
                &mut body,
                t,
                &[("good".into(), "#6baed6".into()), ("best".into(), "#08306b".into())],
            );
        }
        Layer::Boundary => {
            title = "boundary".to_string();
            points(&mut body, &frame, data.z, &grey);
            let hull = data.boundary.expect("checked above");
            let d: Vec<String> = hull
                .iter()
                .map(|p| {
                    let (x, y) = frame.px(*p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                body,
                r##"<polygon points="{}" fill="none" stroke="#d62728" stroke-width="2" stroke-dasharray="6 3"/>"##,
                d.join(" ")
            );
            legend_entries(&mut body, "boundary", &[("estimated hull".into(), "#d62728".into())]);
        }
    }
    let mut out = String::new();
    let width = SIZE + LEGEND_W;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{SIZE}" viewBox="0 0 {width} {SIZE}">"#
    );
    let _ = writeln!(out, "<!-- {} -->", stamp(fingerprint));
    let _ = writeln!(out, r##"<rect width="{width}" height="{SIZE}" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="28" font-size="15" text-anchor="middle">{}</text>"#,
        esc(&title),
        x = SIZE / 2.0
    );
    axes(&mut out, &frame, opts);
    out.push_str(&body);
    out.push_str("</svg>\n");
    Ok(out)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    (
        v.iter().copied().fold(f64::INFINITY, f64::min),
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}
