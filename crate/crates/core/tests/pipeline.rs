use std::path::Path;

use geo::MultiPolygon;
use nalgebra::DMatrix;

use isa_core::config::RunConfig;
use isa_core::footprint::{Footprint, FootprintKind, FootprintMetrics};
use isa_core::geometry;
use isa_core::metadata;
use isa_core::pipeline::{files, Stage, Workspace};
use isa_core::plot::{self, Layer, PlotData, PlotOptions};
use isa_core::synth::{synth_metadata, SynthSpec};

fn synth_input(dir: &Path, seed: u64) -> std::path::PathBuf {
    let md = synth_metadata(&SynthSpec::two_cluster(60), seed).unwrap();
    let p = dir.join("input.csv");
    std::fs::write(&p, metadata::write_metadata_csv(&md, None)).unwrap();
    p
}

fn cfg(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        restarts: 5,
        ..Default::default()
    }
}

#[test]
fn cfg_features_join_into_ingest() {
    let tmp = tempfile::tempdir().unwrap();
    let graphs = tmp.path().join("graphs");
    std::fs::create_dir(&graphs).unwrap();
    let docs = [
        ("A", r#"[{"id":"m","n":3,"edges":[[0,1],[1,2]]}]"#),
        ("B", r#"[{"id":"m","n":3,"edges":[[0,1],[1,2],[0,2]]}]"#),
        ("C", r#"[{"id":"m","n":4,"edges":[[0,1],[0,2],[1,3],[2,3]]}]"#),
    ];
    for (class, methods) in docs {
        let text = format!(r#"{{"class":"{class}","methods":{methods}}}"#);
        std::fs::write(graphs.join(format!("{class}.json")), text).unwrap();
    }
    std::fs::write(graphs.join("notes.txt"), "ignored").unwrap();
    let ws = Workspace::new(tmp.path().join("out"), RunConfig::default()).unwrap();
    let table = ws.features_cfg(&[graphs]).unwrap();
    let input = tmp.path().join("md.csv");
    std::fs::write(
        &input,
        "instance,feature_loc,algo_X,algo_Y\nA,10,0.5,0.6\nB,20,0.9,0.1\nC,30,0.2,0.2\n",
    )
    .unwrap();
    let md = ws.ingest(&input, Some(&table)).unwrap();
    let cc = md.feature_index("avg_cc").unwrap();
    let row: Vec<f64> = md.features().row(cc).iter().copied().collect();
    // E - N + 2 for the path, the triangle and the diamond
    assert_eq!(row, vec![1.0, 2.0, 2.0]);
}

#[test]
fn stages_resume_from_earlier_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let input = synth_input(tmp.path(), 1);
    let ws = Workspace::new(tmp.path().join("out"), cfg(1)).unwrap();
    ws.run(&input, None).unwrap();
    let before = std::fs::read(ws.path(files::FOOTPRINT_SUMMARY)).unwrap();
    let again = Workspace::new(tmp.path().join("out"), cfg(1)).unwrap();
    again.footprints().unwrap();
    again.report().unwrap();
    assert_eq!(std::fs::read(ws.path(files::FOOTPRINT_SUMMARY)).unwrap(), before);

    let other = Workspace::new(tmp.path().join("out"), cfg(2)).unwrap();
    let err = other.footprints().unwrap_err();
    assert_eq!(err.stage, Stage::Footprints);
    assert!(err.to_string().contains("fingerprint"), "{err}");
}

#[test]
fn every_artifact_is_stamped() {
    let tmp = tempfile::tempdir().unwrap();
    let input = synth_input(tmp.path(), 3);
    let ws = Workspace::new(tmp.path().join("out"), cfg(3)).unwrap();
    ws.run(&input, None).unwrap();
    let mut stack = vec![ws.out.clone()];
    let mut n = 0;
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
                continue;
            }
            let text = std::fs::read_to_string(&p).unwrap();
            let stamped = isa_core::artifact::text_fingerprint(&text)
                .or_else(|| isa_core::artifact::svg_fingerprint(&text))
                .map(str::to_string)
                .or_else(|| isa_core::artifact::json_fingerprint(&text));
            assert_eq!(stamped.as_deref(), Some(ws.fingerprint.as_str()), "{}", p.display());
            n += 1;
        }
    }
    assert!(n > 20);
}

#[test]
fn missing_input_fails_in_ingest() {
    let tmp = tempfile::tempdir().unwrap();
    let ws = Workspace::new(tmp.path(), RunConfig::default()).unwrap();
    let err = ws.run(&tmp.path().join("absent.csv"), None).unwrap_err();
    assert_eq!(err.stage, Stage::Ingest);
    assert_eq!(err.stage.exit_code(), 10);
}

fn square(tech: &str, idx: usize, x0: f64) -> Footprint {
    Footprint {
        technique: tech.into(),
        technique_index: idx,
        kind: FootprintKind::Best,
        polygons: MultiPolygon::new(vec![geometry::polygon_from_ring(&[
            [x0, 0.0],
            [x0 + 1.0, 0.0],
            [x0 + 1.0, 1.0],
            [x0, 1.0],
        ])]),
        metrics: FootprintMetrics::default(),
    }
}

/// Pixel bounding box of each filled `<path>` in an SVG.
fn path_boxes(svg: &str) -> Vec<(f64, f64, f64, f64)> {
    svg.lines()
        .filter(|l| l.starts_with("<path d=\""))
        .map(|l| {
            let d = &l[9..l[9..].find('"').unwrap() + 9];
            let nums: Vec<f64> = d
                .split(['M', 'L', 'Z', ' '])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().unwrap())
                .collect();
            let xs = nums.iter().step_by(2);
            let ys = nums.iter().skip(1).step_by(2);
            let (x0, x1) = xs.fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            let (y0, y1) = ys.fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            (x0, x1, y0, y1)
        })
        .collect()
}

#[test]
fn two_disjoint_footprints_render_as_separate_regions() {
    let z = vec![[0.0, 0.0], [1.0, 1.0], [3.0, 0.0], [4.0, 1.0]];
    let names = vec!["P".to_string(), "Q".to_string()];
    let perf = DMatrix::from_element(2, 4, 0.5);
    let feats = DMatrix::from_element(1, 4, 0.0);
    let best = vec![square("P", 0, 0.0), square("Q", 1, 3.0)];
    let data = PlotData {
        z: &z,
        sources: &[],
        technique_names: &names,
        performance: &perf,
        feature_names: &["f".to_string()],
        features: &feats,
        good: None,
        best: Some(&best),
        boundary: None,
    };
    let svg = plot::render(&Layer::Footprints, &data, "fp", &PlotOptions::default()).unwrap();
    assert!(svg.contains(plot::PALETTE[0]) && svg.contains(plot::PALETTE[1]));
    let boxes = path_boxes(&svg);
    assert_eq!(boxes.len(), 2);
    let (a, b) = (boxes[0], boxes[1]);
    assert!(a.1 < b.0 || b.1 < a.0, "regions overlap: {a:?} {b:?}");
    assert_eq!(
        svg,
        plot::render(&Layer::Footprints, &data, "fp", &PlotOptions::default()).unwrap()
    );
}
