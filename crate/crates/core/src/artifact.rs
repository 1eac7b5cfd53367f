//! Stage output files: fingerprint stamps, file I/O and the coordinates table.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::Pt;

const STAMP_PREFIX: &str = "isa fingerprint=";

/// Comment line body written at the top of CSV and text artifacts.
pub fn stamp(fingerprint: &str) -> String {
    format!("{STAMP_PREFIX}{fingerprint}")
}

/// Fingerprint from the first line of a CSV or text artifact.
pub fn text_fingerprint(text: &str) -> Option<&str> {
    text.lines()
        .next()?
        .strip_prefix("# ")?
        .strip_prefix(STAMP_PREFIX)
        .map(str::trim)
}

/// Fingerprint from an SVG artifact's leading comment.
pub fn svg_fingerprint(text: &str) -> Option<&str> {
    let start = text.find(&format!("<!-- {STAMP_PREFIX}"))? + 5 + STAMP_PREFIX.len();
    let end = text[start..].find(" -->")?;
    Some(&text[start..start + end])
}

pub fn json_fingerprint(text: &str) -> Option<String> {
    let v: Value = serde_json::from_str(text).ok()?;
    v.get("fingerprint")?.as_str().map(str::to_string)
}

/// Rejects an artifact produced under a different configuration.
pub fn check_fingerprint(path: &Path, found: Option<&str>, expected: &str) -> Result<()> {
    match found {
        Some(f) if f == expected => Ok(()),
        Some(f) => Err(Error::artifact(
            path,
            format!("written under config fingerprint {f}, current config is {expected}; rerun the earlier stages"),
        )),
        None => Err(Error::artifact(path, "no config fingerprint found")),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a CSV/text artifact and checks its fingerprint.
pub fn read_stamped(path: &Path, expected: &str) -> Result<String> {
    let text = read_text(path)?;
    check_fingerprint(path, text_fingerprint(&text), expected)?;
    Ok(text)
}

pub fn read_stamped_json(path: &Path, expected: &str) -> Result<String> {
    let text = read_text(path)?;
    check_fingerprint(path, json_fingerprint(&text).as_deref(), expected)?;
    Ok(text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Projected instance coordinates with their source labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub instance_ids: Vec<String>,
    pub z: Vec<Pt>,
    /// Empty strings when the meta-data carries no sources.
    pub sources: Vec<String>,
}

pub fn write_coordinates(c: &Coordinates, header_comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header_comment {
        out.push_str(&format!("# {h}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance", "z1", "z2", "source"])
        .expect("in-memory write");
    for ((id, p), s) in c.instance_ids.iter().zip(&c.z).zip(&c.sources) {
        w.write_record([id.clone(), p[0].to_string(), p[1].to_string(), s.clone()])
            .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
    out
}

pub fn parse_coordinates(text: &str) -> Result<Coordinates> {
    let bad = |m: String| Error::Projection(format!("coordinates: {m}"));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["instance", "z1", "z2", "source"] {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut c = Coordinates {
        instance_ids: Vec::new(),
        z: Vec::new(),
        sources: Vec::new(),
    };
    let mut seen = std::collections::HashSet::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("row {}: `{}` is not a finite number", row + 1, &rec[k])))
        };
        let id = rec[0].to_string();
        if id.is_empty() || !seen.insert(id.clone()) {
            return Err(bad(format!("row {}: empty or duplicate instance id `{id}`", row + 1)));
        }
        c.z.push([num(1)?, num(2)?]);
        c.instance_ids.push(id);
        c.sources.push(rec[3].to_string());
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamps_are_recovered() {
        let s = format!("# {}\na,b\n", stamp("0123abcd"));
        assert_eq!(text_fingerprint(&s), Some("0123abcd"));
        assert_eq!(text_fingerprint("a,b\n"), None);
        let svg = format!("<svg>\n<!-- {} -->\n</svg>", stamp("ff00"));
        assert_eq!(svg_fingerprint(&svg), Some("ff00"));
        assert_eq!(json_fingerprint("{\"fingerprint\": \"x1\"}").as_deref(), Some("x1"));
        assert!(check_fingerprint(Path::new("f.csv"), Some("a"), "b").is_err());
        assert!(check_fingerprint(Path::new("f.csv"), None, "b").is_err());
    }

    #[test]
    fn coordinates_roundtrip() {
        let c = Coordinates {
            instance_ids: vec!["a".into(), "b,c".into()],
            z: vec![[0.1, -2.5], [1e-300, 3.0]],
            sources: vec!["s1".into(), String::new()],
        };
        let text = write_coordinates(&c, Some(&stamp("fp")));
        assert_eq!(parse_coordinates(&text).unwrap(), c);
        assert!(parse_coordinates("instance,z1,z2,source\na,1,NaN,\n").is_err());
        assert!(parse_coordinates("instance,z1,z2,source\na,1,2,\na,1,2,\n").is_err());
    }
}
