use std::fs;
use std::path::PathBuf;

use vod_core::io::{
    format_cycles, parse_cycles, parse_design_csv, parse_problem_file, parse_vertex_csv,
    parse_vertex_json, write_design_csv, write_vertex_csv,
};
use vod_core::linalg::{format_rational, parse_rational};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    assert!(!paths.is_empty(), "no seeds in {}", dir.display());
    paths.into_iter().map(|p| fs::read(p).unwrap()).collect()
}

fn texts(target: &str) -> Vec<String> {
    seeds(target)
        .into_iter()
        .map(|s| String::from_utf8(s).unwrap())
        .collect()
}

#[test]
fn rational_seeds_round_trip() {
    for text in texts("parse_rational") {
        if let Ok(q) = parse_rational(&text) {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
    }
}

#[test]
fn problem_file_seeds_load() {
    for text in texts("parse_problem_file") {
        let spec = parse_problem_file(&text).unwrap();
        spec.into_model().unwrap();
    }
}

#[test]
fn design_csv_seeds_round_trip() {
    for text in texts("parse_design_csv") {
        let (points, weights) = parse_design_csv(&text).unwrap();
        assert_eq!(
            parse_design_csv(&write_design_csv(&points, &weights)).unwrap(),
            (points, weights)
        );
    }
}

#[test]
fn cycle_seeds_round_trip() {
    for seed in seeds("parse_cycles") {
        let (&n, rest) = seed.split_first().unwrap();
        let text = std::str::from_utf8(rest).unwrap();
        let p = parse_cycles(text, n.into(), 1).unwrap();
        assert_eq!(parse_cycles(&format_cycles(&p), n.into(), 1).unwrap(), p);
    }
}

#[test]
fn vertex_seeds_round_trip() {
    for text in texts("parse_vertex_csv") {
        let v = parse_vertex_csv(&text).unwrap();
        assert_eq!(parse_vertex_csv(&write_vertex_csv(&v)).unwrap(), v);
    }
    for text in texts("parse_vertex_json") {
        let (doc, v) = parse_vertex_json(&text).unwrap();
        assert_eq!(doc.ell, v.len());
    }
}
