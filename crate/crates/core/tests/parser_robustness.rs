//! Replays the fuzz corpus, plus truncated and byte-flipped variants, through
//! every parser on the stable toolchain. Parsers may reject input but must
//! not panic.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isa_core::artifact;
use isa_core::boundary;
use isa_core::cfgfeat;
use isa_core::config::RunConfig;
use isa_core::footprint;
use isa_core::metadata;
use isa_core::pilot::Projection;
use isa_core::pipeline;
use isa_core::plot::Layer;
use isa_core::prep::PrepReport;
use isa_core::synth::SynthSpec;

const MUTATIONS: usize = 2000;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    assert!(!paths.is_empty(), "no seeds for {target}");
    paths.into_iter().map(|p| std::fs::read(p).unwrap()).collect()
}

fn variants(seed: &[u8], rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    let mut out = vec![seed.to_vec()];
    const BYTES: &[u8] = b",;\n\"{}[]:-.0123456789eENaInf #=x";
    for _ in 0..MUTATIONS {
        let mut v = seed.to_vec();
        match rng.random_range(0..4) {
            0 if !v.is_empty() => v.truncate(rng.random_range(0..v.len())),
            1 if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v[i] = BYTES[rng.random_range(0..BYTES.len())];
            }
            2 => {
                let i = rng.random_range(0..=v.len());
                v.insert(i, BYTES[rng.random_range(0..BYTES.len())]);
            }
            _ if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v.remove(i);
            }
            _ => {}
        }
        out.push(v);
    }
    out
}

fn replay(target: &str, f: impl Fn(&str)) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for seed in seeds(target) {
        for v in variants(&seed, &mut rng) {
            if let Ok(text) = std::str::from_utf8(&v) {
                f(text);
            }
        }
    }
}

#[test]
fn metadata_csv() {
    replay("metadata_csv", |t| {
        if let Ok(md) = metadata::parse_metadata(t) {
            let again = metadata::parse_metadata(&metadata::write_metadata_csv(&md, None)).unwrap();
            assert_eq!(again.features(), md.features());
            assert_eq!(again.performance(), md.performance());
        }
    });
}

#[test]
fn feature_table() {
    replay("feature_table", |t| {
        let _ = metadata::parse_feature_table(t);
    });
}

#[test]
fn cfg_graphs() {
    replay("cfg_graphs", |t| {
        if let Ok(g) = cfgfeat::parse_class_graphs(t) {
            if g.methods.iter().all(|m| m.node_count <= 64) {
                let _ = cfgfeat::class_features(&g.methods);
            }
        }
    });
}

#[test]
fn run_config() {
    replay("run_config", |t| {
        if let Ok(cfg) = RunConfig::parse(t) {
            assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        }
    });
}

#[test]
fn projection_json() {
    replay("projection_json", |t| {
        let _ = Projection::from_json(t);
    });
}

#[test]
fn coordinates_csv() {
    replay("coordinates_csv", |t| {
        if let Ok(c) = artifact::parse_coordinates(t) {
            assert_eq!(
                artifact::parse_coordinates(&artifact::write_coordinates(&c, None)).unwrap(),
                c
            );
        }
    });
}

#[test]
fn footprint_geojson() {
    replay("footprint_geojson", |t| {
        if let Ok((fp, print)) = footprint::parse_footprint_geojson(t) {
            let (again, _) = footprint::parse_footprint_geojson(&footprint::footprint_to_geojson(&fp, &print)).unwrap();
            assert_eq!(again.polygons, fp.polygons);
        }
    });
}

#[test]
fn boundary_geojson() {
    replay("boundary_geojson", |t| {
        let _ = boundary::parse_boundary_geojson(t);
    });
}

#[test]
fn footprint_summary() {
    replay("footprint_summary", |t| {
        let _ = footprint::parse_summary_csv(t);
    });
}

#[test]
fn featsel_report() {
    replay("featsel_report", |t| {
        let _ = pipeline::parse_selected_features(t);
    });
}

#[test]
fn prep_params() {
    replay("prep_params", |t| {
        if let Ok(r) = serde_json::from_str::<PrepReport>(t) {
            for f in &r.features {
                let _ = r.transform_value(&f.name, 1.0);
            }
        }
    });
}

#[test]
fn synth_spec() {
    replay("synth_spec", |t| {
        let _ = SynthSpec::parse(t);
    });
}

#[test]
fn plot_layer() {
    replay("plot_layer", |t| {
        let _ = t.parse::<Layer>();
    });
}
